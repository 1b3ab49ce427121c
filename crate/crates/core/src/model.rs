//! Model-level functions of the magnetization chain.
//!
//! A configuration of `N` spins enters the dynamics only through its
//! magnetization `m = n / N`, where `n` is the number of `+1` spins minus the
//! number of `-1` spins. Spin `i` flips at rate `exp(-β x_i m)`, so the lumped
//! chain on `n` jumps `n → n + 2` at rate `λ+(m) = N (1 - m)/2 · e^{βm}` and
//! `n → n - 2` at rate `λ-(m) = N (1 + m)/2 · e^{-βm}`.

use crate::error::{Error, Result};
use crate::math;

/// Static description of one system: inverse temperature and spin count.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    beta: f64,
    n_spins: u64,
}

impl ModelParams {
    /// `beta` must be positive and finite, `n_spins` positive and even.
    pub fn new(beta: f64, n_spins: u64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Config("beta must be positive and finite"));
        }
        if n_spins == 0 || !n_spins.is_multiple_of(2) {
            return Err(Error::Config("spin count must be positive and even"));
        }
        if n_spins > (1 << 53) {
            return Err(Error::Config("spin count exceeds 2^53"));
        }
        Ok(ModelParams { beta, n_spins })
    }

    /// Same as [`ModelParams::new`] but additionally requires `beta > 1`, the
    /// regime with two stable magnetizations `±m*`.
    pub fn low_temperature(beta: f64, n_spins: u64) -> Result<Self> {
        let params = Self::new(beta, n_spins)?;
        if beta <= 1.0 {
            return Err(Error::NoDoubleWell);
        }
        Ok(params)
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    #[inline]
    pub fn n_spins(&self) -> u64 {
        self.n_spins
    }

    /// `N` as a float.
    #[inline]
    pub fn n(&self) -> f64 {
        self.n_spins as f64
    }
}

/// Chain state: the integer spin imbalance `n`, with `m = n / N` on demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MagnetizationState {
    imbalance: i64,
    n_spins: u64,
}

impl MagnetizationState {
    pub fn new(imbalance: i64, params: &ModelParams) -> Result<Self> {
        check_imbalance(imbalance, params)?;
        Ok(MagnetizationState {
            imbalance,
            n_spins: params.n_spins,
        })
    }

    /// The disordered state `n = 0`.
    pub fn zero(params: &ModelParams) -> Self {
        MagnetizationState {
            imbalance: 0,
            n_spins: params.n_spins,
        }
    }

    #[inline]
    pub fn imbalance(&self) -> i64 {
        self.imbalance
    }

    #[inline]
    pub fn magnetization(&self) -> f64 {
        self.imbalance as f64 / self.n_spins as f64
    }

    /// Number of `+1` spins, `(N + n) / 2`.
    pub fn plus_spins(&self) -> u64 {
        ((self.n_spins as i64 + self.imbalance) / 2) as u64
    }
}

fn check_imbalance(n: i64, params: &ModelParams) -> Result<()> {
    let total = params.n_spins as i64;
    if n.unsigned_abs() > params.n_spins {
        return Err(Error::Domain("|n| exceeds the spin count"));
    }
    if (total + n) % 2 != 0 {
        return Err(Error::Domain("(N + n) / 2 must be an integer"));
    }
    Ok(())
}

fn check_unit(m: f64) -> Result<()> {
    if m.is_nan() || math::abs(m) > 1.0 {
        return Err(Error::Domain("magnetization outside [-1, 1]"));
    }
    Ok(())
}

/// Total rates `(λ+, λ-)` of the jumps `m → m ± 2/N`.
pub fn jump_rates(m: f64, params: &ModelParams) -> Result<(f64, f64)> {
    check_unit(m)?;
    let n = params.n();
    // λ+(-m) and λ-(m) are bitwise equal.
    let plus = 0.5 * n * (1.0 - m) * math::exp(params.beta * m);
    let minus = 0.5 * n * (1.0 + m) * math::exp(-params.beta * m);
    Ok((plus, minus))
}

/// `a = b'(0) = 2β - 2`, the expansion rate at `m = 0`.
#[inline]
pub fn lyapunov(beta: f64) -> f64 {
    2.0 * beta - 2.0
}

/// `sinh(y) - y` without cancellation for small `y`.
fn sinh_minus_identity(y: f64) -> f64 {
    if math::abs(y) >= 1.0 {
        return math::sinh(y) - y;
    }
    let y2 = y * y;
    let mut term = y * y2 / 6.0;
    let mut sum = term;
    let mut k = 3.0;
    while math::abs(term) > 1e-17 * math::abs(sum) {
        term *= y2 / ((k + 1.0) * (k + 2.0));
        sum += term;
        k += 2.0;
    }
    sum
}

/// `Q(m) = b(m) - a m`, the nonlinear part of the drift, for any real `m`.
///
/// Evaluated as `2 (sinh(βm) - βm) - 4 m sinh²(βm/2)` so that the `O(m³)`
/// behaviour near zero keeps full relative precision.
pub fn nonlinearity(m: f64, beta: f64) -> f64 {
    let y = beta * m;
    let half = math::sinh(0.5 * y);
    2.0 * sinh_minus_identity(y) - 4.0 * m * half * half
}

/// Drift `b(m) = (1 - m) e^{βm} - (1 + m) e^{-βm}`, defined for every real `m`.
pub fn drift(m: f64, beta: f64) -> f64 {
    lyapunov(beta) * m + nonlinearity(m, beta)
}

/// Bernoulli entropy in nats, with `0 ln 0 = 0`.
pub fn entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain("entropy argument outside [0, 1]"));
    }
    let term = |p: f64| if p == 0.0 { 0.0 } else { -p * math::ln(p) };
    Ok(term(x) + term(1.0 - x))
}

/// Free energy per spin `F(m) = -(β/2) m² - h(1/2 + m/2)`.
pub fn free_energy(m: f64, beta: f64) -> Result<f64> {
    check_unit(m)?;
    Ok(-0.5 * beta * m * m - entropy(0.5 + 0.5 * m)?)
}

/// Applies the generator of the magnetization chain to `f` at `m`:
///
/// `L f(m) = (N/2) [ (1-m) e^{βm} (f(m+2/N) - f(m)) + (1+m) e^{-βm} (f(m-2/N) - f(m)) ]`.
///
/// A neighbour with zero jump rate (`m = ±1`) is not evaluated.
pub fn generator_apply<F>(f: F, m: f64, params: &ModelParams) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    check_unit(m)?;
    let step = 2.0 / params.n();
    let (up, down) = jump_rates(m, params)?;
    let here = f(m);
    let mut acc = 0.0;
    for (rate, target) in [(up, m + step), (down, m - step)] {
        if rate == 0.0 {
            continue;
        }
        if math::abs(target) > 1.0 + 1e-12 {
            return Err(Error::Domain("generator evaluates f outside [-1, 1]"));
        }
        acc += rate * (f(target) - here);
    }
    Ok(acc)
}

/// `ln n! - [(n + 1/2) ln n - n + ln √(2π)]`, the Stirling remainder.
fn stirling_remainder(n: f64) -> f64 {
    const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
    if n <= 15.0 {
        return math::ln_gamma(n + 1.0) - (n + 0.5) * math::ln(n) + n - LN_SQRT_2PI;
    }
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let inv2 = 1.0 / (n * n);
    (S0 - (S1 - (S2 - (S3 - S4 * inv2) * inv2) * inv2) * inv2) / n
}

/// `ln C(total, k)` from Stirling's series with explicit remainders, which
/// keeps absolute accuracy near `1e-13` where differences of `ln Γ` values of
/// size `N ln N` would not.
fn ln_binomial(total: u64, k: u64) -> f64 {
    let k = k.min(total - k);
    if k == 0 {
        return 0.0;
    }
    let n = total as f64;
    let small = k as f64;
    let large = n - small;
    let frac = small / n;
    let entropy_part = -small * math::ln(frac) - large * math::ln_1p(-frac);
    let prefactor = -0.5 * math::ln(core::f64::consts::TAU * small * (large / n));
    entropy_part + prefactor + stirling_remainder(n)
        - stirling_remainder(small)
        - stirling_remainder(large)
}

/// Unnormalized log Gibbs weight of the level `M = n/N`:
/// `ln C(N, (N+n)/2) + β n² / (2N)`.
pub fn gibbs_log_weight(n: i64, params: &ModelParams) -> Result<f64> {
    check_imbalance(n, params)?;
    let plus = ((params.n_spins as i64 + n) / 2) as u64;
    let nf = n as f64;
    Ok(ln_binomial(params.n_spins, plus) + params.beta * nf * nf / (2.0 * params.n()))
}

/// `| ln[π(n) λ+(n)] - ln[π(n+2) λ-(n+2)] |` with `π` the unnormalized Gibbs
/// weight; zero up to rounding when the chain is reversible.
///
/// Returns [`Error::Boundary`] at `n = N`, where `λ+` vanishes.
pub fn detailed_balance_residual(n: i64, params: &ModelParams) -> Result<f64> {
    check_imbalance(n, params)?;
    if n == params.n_spins as i64 {
        return Err(Error::Boundary);
    }
    let total = params.n();
    let (up, _) = jump_rates(n as f64 / total, params)?;
    let (_, down) = jump_rates((n + 2) as f64 / total, params)?;
    let forward = gibbs_log_weight(n, params)? + math::ln(up);
    let backward = gibbs_log_weight(n + 2, params)? + math::ln(down);
    Ok(math::abs(forward - backward))
}
