//! Deterministic and asymptotic theory of the exit from the unstable state.
//!
//! With `a = 2β - 2` and `Q(x) = b(x) - a x`, the centred exit time
//! `τ_N(R) - ln N / (2a)` converges in law to `-(1/a) ln|G| + D(R)`, where `G`
//! is standard Gaussian, `D(R) = K(R) + ln R / a + ln(a/2) / (2a)` and
//! `K(R) = -∫₀^R Q(x) / (a x b(x)) dx`. The sign of the exit is an independent
//! fair coin.
//!
//! `K(r)` is also the limit of `t(δ, r) - (1/a) ln(r/δ)` as `δ → 0`, where
//! `t(δ, r) = ∫_δ^r dx / b(x)` is the transit time of the flow `ẋ = b(x)`.
//! [`correction_k`] and [`transit_time`] integrate different integrands so the
//! two can check each other.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::model::{drift, free_energy, jump_rates, lyapunov, nonlinearity, ModelParams};
use crate::quad::{self, DEFAULT_ABS_TOL};
use crate::special::{normal_quantile, normal_sf};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Positive root `m*` of `β m = atanh(m)` for `β > 1`.
///
/// Bisection over `[1e-15, 1 - 1e-15]`, run until the bracket cannot shrink
/// further in double precision.
pub fn solve_m_star(beta: f64) -> Result<f64> {
    if beta.is_nan() || beta <= 1.0 {
        return Err(Error::NoDoubleWell);
    }
    if !beta.is_finite() {
        return Err(Error::Domain("beta must be finite"));
    }
    let g = |m: f64| beta * m - math::atanh(m);
    let (mut lo, mut hi) = (1e-15, 1.0 - 1e-15);
    if g(hi) >= 0.0 {
        // β so large that m* rounds to the upper bracket.
        return Ok(hi);
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if math::abs(g(lo)) <= math::abs(g(hi)) {
        lo
    } else {
        hi
    })
}

fn check_below_m_star(r: f64, beta: f64) -> Result<f64> {
    let m_star = solve_m_star(beta)?;
    if !(r >= 0.0 && r < m_star) {
        return Err(Error::Domain("threshold must lie in [0, m*)"));
    }
    Ok(m_star)
}

/// Integrand of `K`, with its removable singularity at zero set to the limit 0.
fn k_integrand(x: f64, beta: f64, a: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    -nonlinearity(x, beta) / (a * x * drift(x, beta))
}

/// `K(r) = -∫₀^r Q(x) / (a x b(x)) dx` at absolute tolerance `1e-10`.
pub fn correction_k(r: f64, beta: f64) -> Result<f64> {
    correction_k_with_tol(r, beta, DEFAULT_ABS_TOL)
}

pub fn correction_k_with_tol(r: f64, beta: f64, abs_tol: f64) -> Result<f64> {
    check_below_m_star(r, beta)?;
    let a = lyapunov(beta);
    Ok(quad::integrate(|x| k_integrand(x, beta, a), 0.0, r, abs_tol)?.value)
}

/// `D(r) = K(r) + ln r / a + ln(a/2) / (2a)`, the shift of the limit law.
pub fn shift_d(r: f64, beta: f64) -> Result<f64> {
    shift_d_with_tol(r, beta, DEFAULT_ABS_TOL)
}

pub fn shift_d_with_tol(r: f64, beta: f64, abs_tol: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain("threshold must be positive"));
    }
    let k = correction_k_with_tol(r, beta, abs_tol)?;
    let a = lyapunov(beta);
    Ok(k + math::ln(r) / a + math::ln(0.5 * a) / (2.0 * a))
}

/// Time for the flow `ẋ = b(x)` to travel from `delta` to `r`,
/// `0 < delta ≤ r < m*`.
///
/// Integrated in `u = ln x` as `∫ x / b(x) du`, whose integrand tends to `1/a`
/// at the origin, so tiny `delta` costs nothing extra.
pub fn transit_time(delta: f64, r: f64, beta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= r) {
        return Err(Error::Domain("transit time needs 0 < delta <= r"));
    }
    check_below_m_star(r, beta)?;
    if delta == r {
        return Ok(0.0);
    }
    let integrand = |u: f64| {
        let x = math::exp(u);
        x / drift(x, beta)
    };
    let t = quad::integrate(integrand, math::ln(delta), math::ln(r), 1e-12)?;
    Ok(t.value)
}

/// Position `S^t x0` of the deterministic flow `ẋ = b(x)`.
///
/// Classical RK4 with step `1e-4 / a`; the step is halved until two successive
/// resolutions agree to `1e-12`. Negative `t` runs the flow backwards.
pub fn flow(x0: f64, t: f64, beta: f64) -> Result<f64> {
    if !(math::abs(x0) < 1.0) {
        return Err(Error::Domain("flow start must satisfy |x0| < 1"));
    }
    if !t.is_finite() {
        return Err(Error::Domain("flow time must be finite"));
    }
    if t == 0.0 || x0 == 0.0 {
        return Ok(x0);
    }
    let a = lyapunov(beta);
    let base_step = if a > 0.0 { 1e-4 / a } else { 1e-4 };
    let mut steps = (math::ceil(math::abs(t) / base_step) as u64).max(1);
    let mut coarse = rk4(x0, t, steps, beta);
    for _ in 0..6 {
        steps *= 2;
        let fine = rk4(x0, t, steps, beta);
        if math::abs(fine - coarse) <= 1e-12 {
            return Ok(fine);
        }
        coarse = fine;
    }
    Ok(coarse)
}

fn rk4(x0: f64, t: f64, steps: u64, beta: f64) -> f64 {
    let h = t / steps as f64;
    let mut x = x0;
    for _ in 0..steps {
        let k1 = drift(x, beta);
        let k2 = drift(x + 0.5 * h * k1, beta);
        let k3 = drift(x + 0.5 * h * k2, beta);
        let k4 = drift(x + h * k3, beta);
        x += h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
    }
    x
}

/// Large-deviation rate `J(m) = F(m) - min F`.
pub fn rate_function_j(m: f64, beta: f64) -> Result<f64> {
    let f = free_energy(m, beta)?;
    let min = if beta > 1.0 {
        free_energy(solve_m_star(beta)?, beta)?
    } else {
        free_energy(0.0, beta)?
    };
    Ok((f - min).max(0.0))
}

/// Theory constants for an exit experiment at inverse temperature `beta` and
/// threshold `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TheoryConstants {
    pub beta: f64,
    pub a: f64,
    pub m_star: f64,
    pub r_threshold: f64,
    pub k_of_r: f64,
    pub d_of_r: f64,
}

impl TheoryConstants {
    /// Requires `beta > 1` and `0 < r < m*`.
    pub fn new(beta: f64, r: f64) -> Result<Self> {
        let m_star = solve_m_star(beta)?;
        if !(r > 0.0 && r < m_star) {
            return Err(Error::Domain("threshold must lie in (0, m*)"));
        }
        let a = lyapunov(beta);
        let k_of_r = correction_k(r, beta)?;
        let d_of_r = k_of_r + math::ln(r) / a + math::ln(0.5 * a) / (2.0 * a);
        Ok(TheoryConstants {
            beta,
            a,
            m_star,
            r_threshold: r,
            k_of_r,
            d_of_r,
        })
    }

    /// Threshold given as a fraction of `m*`, `0 < fraction < 1`.
    pub fn from_fraction(beta: f64, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::Domain("threshold fraction must lie in (0, 1)"));
        }
        let m_star = solve_m_star(beta)?;
        Self::new(beta, fraction * m_star)
    }

    /// `|β m* - atanh(m*)|`.
    pub fn m_star_residual(&self) -> f64 {
        math::abs(self.beta * self.m_star - math::atanh(self.m_star))
    }

    /// The limit law of the centred exit time `τ_N(R) - ln N / (2a)`.
    pub fn limit_law(&self) -> LimitLaw {
        LimitLaw {
            a: self.a,
            shift: self.d_of_r,
            sigma: 1.0,
        }
    }
}

/// Law of `-(1/a) ln|Z| + shift` with `Z ~ N(0, sigma²)`.
///
/// For the exit time `τ_N(R)` use `sigma = 1, shift = D(R)`; for the exit time
/// from the shrinking ball of radius `N^{-γ}` use `sigma = √(2/a), shift = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LimitLaw {
    pub a: f64,
    pub shift: f64,
    pub sigma: f64,
}

impl LimitLaw {
    pub fn new(a: f64, shift: f64, sigma: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain("limit law needs a > 0"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain("limit law needs sigma > 0"));
        }
        if !shift.is_finite() {
            return Err(Error::Domain("limit law shift must be finite"));
        }
        Ok(LimitLaw { a, shift, sigma })
    }

    /// Law of the centred shrinking-ball exit time: `H ~ N(0, 2/a)`, no shift.
    pub fn theta(a: f64) -> Result<Self> {
        Self::new(a, 0.0, math::sqrt(2.0 / a))
    }

    fn scaled(&self, t: f64) -> f64 {
        math::exp(-self.a * (t - self.shift)) / self.sigma
    }

    /// `P(T ≤ t) = 2 (1 - Φ(e^{-a (t - shift)} / σ))`.
    pub fn cdf(&self, t: f64) -> f64 {
        if t.is_nan() {
            return f64::NAN;
        }
        2.0 * normal_sf(self.scaled(t))
    }

    pub fn pdf(&self, t: f64) -> f64 {
        let z = self.scaled(t);
        if !z.is_finite() {
            return 0.0;
        }
        const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
        2.0 * self.a * z * INV_SQRT_2PI * math::exp(-0.5 * z * z)
    }

    /// Inverse of [`LimitLaw::cdf`]: `shift - (1/a) ln(σ Φ⁻¹(1 - q/2))`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain("quantile level outside (0, 1)"));
        }
        // Φ⁻¹(1 - q/2) = -Φ⁻¹(q/2), accurate for q near 0 and near 1.
        let z = -normal_quantile(0.5 * q)?;
        Ok(self.shift - math::ln(self.sigma * z) / self.a)
    }

    /// `shift - (ln σ - (γ_E + ln 2) / 2) / a`.
    pub fn mean(&self) -> f64 {
        let e_ln_abs = math::ln(self.sigma) - 0.5 * (EULER_GAMMA + core::f64::consts::LN_2);
        self.shift - e_ln_abs / self.a
    }
}

/// Solves a tridiagonal system with the Thomas algorithm.
///
/// `lower[i]` multiplies `x[i-1]` (so `lower[0]` is ignored) and `upper[i]`
/// multiplies `x[i+1]` (so the last entry is ignored).
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::Usage("tridiagonal bands must have equal length"));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return Err(Error::Singular);
    }
    c.push(upper[0] / pivot);
    d.push(rhs[0] / pivot);
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::Singular);
        }
        c.push(upper[i] / pivot);
        d.push((rhs[i] - lower[i] * d[i - 1]) / pivot);
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// Largest number of interior states accepted by [`exact_mean_exit`].
pub const MAX_EXACT_STATES: u64 = 1_000_000;

/// Exact expected time for the chain started at `n = 0` to reach
/// `|n| ≥ n_threshold`.
pub fn exact_mean_exit(params: &ModelParams, n_threshold: u64) -> Result<f64> {
    let u = mean_exit_profile(params, n_threshold)?;
    Ok(u[(n_threshold as usize - 2) / 2])
}

/// Expected exit times from every interior state `n = -n_threshold + 2, …,
/// n_threshold - 2` (step 2): the solution of `L u = -1` with `u = 0` at
/// `±n_threshold`.
pub fn mean_exit_profile(params: &ModelParams, n_threshold: u64) -> Result<Vec<f64>> {
    if n_threshold < 2 || !n_threshold.is_multiple_of(2) || n_threshold > params.n_spins() {
        return Err(Error::Config("threshold count must be even and in [2, N]"));
    }
    let interior = n_threshold - 1;
    if interior > MAX_EXACT_STATES {
        return Err(Error::Config("too many states for the exact solver"));
    }
    let len = interior as usize;
    let mut lower = Vec::with_capacity(len);
    let mut diag = Vec::with_capacity(len);
    let mut upper = Vec::with_capacity(len);
    let top = n_threshold as i64;
    for i in 0..len {
        let n = -top + 2 + 2 * i as i64;
        let (up, down) = jump_rates(n as f64 / params.n(), params)?;
        lower.push(down);
        diag.push(-(up + down));
        upper.push(up);
    }
    let rhs = alloc::vec![-1.0; len];
    solve_tridiagonal(&lower, &diag, &upper, &rhs)
}

/// Smallest even integer `≥ x` (for `x ≥ 0`).
pub fn even_count_at_least(x: f64) -> u64 {
    2 * math::ceil(0.5 * x) as u64
}
