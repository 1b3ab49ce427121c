//! Comparison of simulated exit times with their limit law.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::sim::ExitSample;
use crate::theory::LimitLaw;

pub use crate::special::{normal_cdf, normal_quantile};

/// Empirical distribution function of a finite sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Usage("empty sample"));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Usage("sample contains NaN"));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Ecdf { sorted })
    }

    /// `#{x_i ≤ t} / n` (right-continuous).
    pub fn eval(&self, t: f64) -> f64 {
        self.sorted.partition_point(|&x| x <= t) as f64 / self.sorted.len() as f64
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Sample quantile, linear interpolation between closest ranks
    /// (`h = (n - 1) q`).
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain("quantile level outside [0, 1]"));
        }
        let h = (self.sorted.len() - 1) as f64 * q;
        let lo = h as usize;
        let hi = (lo + 1).min(self.sorted.len() - 1);
        let frac = h - lo as f64;
        Ok(self.sorted[lo] + frac * (self.sorted[hi] - self.sorted[lo]))
    }

    /// `∫ t dF_n(t)`, summed over the jumps of the step function.
    pub fn mean(&self) -> f64 {
        let n = self.sorted.len() as f64;
        self.sorted.iter().map(|&x| x / n).sum()
    }
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF:
/// `max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n)`.
pub fn ks_statistic<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> Result<f64> {
    let ecdf = Ecdf::new(values)?;
    Ok(ks_statistic_sorted(ecdf.sorted(), cdf))
}

fn ks_statistic_sorted<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        d.max(above).max(below)
    })
}

/// Asymptotic p-value `Q(√n d)` of the Kolmogorov distribution,
/// `Q(λ) = 2 Σ_{k≥1} (-1)^{k-1} e^{-2k²λ²}`.
///
/// For small `λ` the alternating series converges slowly and the equivalent
/// theta-function form `1 - (√(2π)/λ) Σ e^{-(2k-1)²π²/(8λ²)}` is used.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let lambda = math::sqrt(n as f64) * d;
    if !(lambda > 0.0) {
        return 1.0;
    }
    let p = if lambda < 1.18 {
        let pi2 = core::f64::consts::PI * core::f64::consts::PI;
        let scale = -pi2 / (8.0 * lambda * lambda);
        let mut sum = 0.0;
        for k in 1..=20 {
            let odd = (2 * k - 1) as f64;
            let term = math::exp(odd * odd * scale);
            sum += term;
            if term < 1e-18 {
                break;
            }
        }
        1.0 - math::sqrt(core::f64::consts::TAU) / lambda * sum
    } else {
        let mut sum = 0.0;
        let mut sign = 1.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = math::exp(-2.0 * kf * kf * lambda * lambda);
            sum += sign * term;
            sign = -sign;
            if term < 1e-18 {
                break;
            }
        }
        2.0 * sum
    };
    p.clamp(0.0, 1.0)
}

/// Fraction of `+1` signs and its z-score against a fair coin,
/// `(f - 1/2) / √(1/(4n))`.
pub fn sign_balance<I: IntoIterator<Item = i8>>(signs: I) -> Result<(f64, f64)> {
    let (plus, n) = signs
        .into_iter()
        .fold((0u64, 0u64), |(p, n), s| (p + u64::from(s > 0), n + 1));
    if n == 0 {
        return Err(Error::Usage("empty sample"));
    }
    let fraction = plus as f64 / n as f64;
    let z = (fraction - 0.5) / math::sqrt(0.25 / n as f64);
    Ok((fraction, z))
}

/// Ordinary least squares line.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr_slope: f64,
}

/// OLS fit of `ys` on `xs`; needs at least 3 points and non-constant `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::Usage("xs and ys differ in length"));
    }
    if xs.len() < 3 {
        return Err(Error::Usage("need at least 3 points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Usage("xs are all equal"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let stderr_slope = math::sqrt(ssr / (n - 2.0) / sxx);
    Ok(LinearFit {
        slope,
        intercept,
        stderr_slope,
    })
}

/// Exit time minus its deterministic centring, with the exit sign.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShiftedSample {
    pub value: f64,
    pub sign: i8,
}

impl ShiftedSample {
    /// `shift` is `SimConfig::time_shift()` of the run that produced `sample`.
    pub fn from_exit(sample: &ExitSample, shift: f64) -> Self {
        ShiftedSample {
            value: sample.exit_time - shift,
            sign: sample.sign,
        }
    }
}

/// Quantile levels reported by [`gof_report`].
pub const REPORT_LEVELS: [f64; 19] = [
    0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80,
    0.85, 0.90, 0.95,
];

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuantileRow {
    pub q: f64,
    pub empirical: f64,
    pub theoretical: f64,
}

/// Goodness of fit of shifted exit times against a fully specified limit law.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GofReport {
    pub n: usize,
    pub ks_distance: f64,
    pub ks_pvalue: f64,
    pub sign_fraction_plus: f64,
    pub sign_zscore: f64,
    pub quantiles: Vec<QuantileRow>,
    pub mean_empirical: f64,
    pub mean_theoretical: f64,
}

/// Builds a [`GofReport`]. Truncated samples must be removed beforehand.
pub fn gof_report(samples: &[ShiftedSample], law: &LimitLaw) -> Result<GofReport> {
    let values: Vec<f64> = samples.iter().map(|s| s.value).collect();
    let ecdf = Ecdf::new(&values)?;
    let ks_distance = ks_statistic_sorted(ecdf.sorted(), |t| law.cdf(t));
    let (sign_fraction_plus, sign_zscore) = sign_balance(samples.iter().map(|s| s.sign))?;
    let quantiles = REPORT_LEVELS
        .iter()
        .map(|&q| {
            Ok(QuantileRow {
                q,
                empirical: ecdf.quantile(q)?,
                theoretical: law.quantile(q)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GofReport {
        n: ecdf.len(),
        ks_distance,
        ks_pvalue: ks_pvalue(ks_distance, ecdf.len()),
        sign_fraction_plus,
        sign_zscore,
        quantiles,
        mean_empirical: ecdf.mean(),
        mean_theoretical: law.mean(),
    })
}
