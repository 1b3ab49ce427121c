//! Exact event-driven simulation of the magnetization chain.
//!
//! The chain lives on the integer imbalance `n` and starts at `n = 0`. Each
//! step draws an exponential waiting time with the total jump rate of the
//! current state and then moves `n → n ± 2` with probability `λ± / λ`. A run
//! stops at the first jump that brings `|n|` to the threshold count, or when the
//! clock passes `max_time`.
//!
//! # Random numbers
//!
//! Trajectory `i` of an ensemble with master seed `s` uses the seed
//! [`derive_seed`]`(s, i)`, which seeds a xoshiro256++ generator through the
//! generator's standard splitmix64 expansion (`SeedableRng::seed_from_u64`).
//! Every event consumes exactly two 64-bit outputs: the first gives the
//! waiting time `-ln(u) / λ` with `u = (x >> 11 + 1) · 2⁻⁵³ ∈ (0, 1]`, the
//! second the direction, up if `(x >> 11) · 2⁻⁵³ < λ+ / λ`.

use alloc::vec::Vec;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::math;
use crate::model::{drift, jump_rates, lyapunov, ModelParams};
use crate::theory::{even_count_at_least, solve_m_star, LimitLaw, TheoryConstants};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const UNIT: f64 = 1.0 / (1u64 << 53) as f64;

/// One step of the splitmix64 generator seeded at `x`: adds the golden gamma
/// and applies the finalizer.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trajectory `index`: `splitmix64(master + index · 0x9E3779B97F4A7C15)`,
/// i.e. output `index` of a splitmix64 stream started at `master`.
#[inline]
pub fn derive_seed(master_seed: u64, trajectory_index: u64) -> u64 {
    splitmix64(master_seed.wrapping_add(trajectory_index.wrapping_mul(GOLDEN_GAMMA)))
}

/// How the exit threshold `R` of a `τ` experiment is given.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ThresholdSpec {
    /// `R` itself.
    Absolute(f64),
    /// `R = fraction · m*`.
    FractionOfMStar(f64),
}

/// Which exit time is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Mode {
    /// `τ_N(R) = inf{t : |M_N(t)| ≥ R}`.
    Tau(ThresholdSpec),
    /// `θ_N = inf{t : |M_N(t)| ≥ N^{-γ}}` with `1/4 < γ < 1/2`.
    Theta { gamma: f64 },
}

/// A validated simulation configuration with its resolved threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    params: ModelParams,
    mode: Mode,
    radius: f64,
    n_threshold: u64,
    max_time: f64,
    record_path: bool,
}

impl SimConfig {
    /// Validates `mode` against `params` (which must have `β > 1`) and resolves
    /// the threshold count: the smallest even integer `≥ N R` for `τ`, and
    /// `2 ⌈N^{1-γ} / 2⌉` for `θ`. Any `0 < R < m*` is accepted; for `R < 2/N`
    /// the count is 2 and the run ends at the first jump.
    pub fn new(params: ModelParams, mode: Mode) -> Result<Self> {
        let beta = params.beta();
        if beta <= 1.0 {
            return Err(Error::NoDoubleWell);
        }
        let n = params.n();
        let (radius, n_threshold) = match mode {
            Mode::Tau(spec) => {
                let m_star = solve_m_star(beta)?;
                let r = match spec {
                    ThresholdSpec::Absolute(r) => r,
                    ThresholdSpec::FractionOfMStar(f) => {
                        if !(f > 0.0 && f < 1.0) {
                            return Err(Error::Config("threshold fraction must lie in (0, 1)"));
                        }
                        f * m_star
                    }
                };
                if !(r < m_star) {
                    return Err(Error::Config("threshold R must be below m*"));
                }
                if !(r > 0.0) {
                    return Err(Error::Config("threshold R must be positive"));
                }
                let count = even_count_at_least(r * n);
                if count > params.n_spins() {
                    return Err(Error::Config("threshold count exceeds N"));
                }
                (r, count)
            }
            Mode::Theta { gamma } => {
                if !(gamma > 0.25 && gamma < 0.5) {
                    return Err(Error::Config("gamma must lie in (1/4, 1/2)"));
                }
                (
                    math::powf(n, -gamma),
                    even_count_at_least(math::powf(n, 1.0 - gamma)),
                )
            }
        };
        let a = lyapunov(beta);
        let max_time = 50.0 * math::ln(n) / (2.0 * a) + 100.0;
        Ok(SimConfig {
            params,
            mode,
            radius,
            n_threshold,
            max_time,
            record_path: false,
        })
    }

    pub fn tau(params: ModelParams, spec: ThresholdSpec) -> Result<Self> {
        Self::new(params, Mode::Tau(spec))
    }

    pub fn theta(params: ModelParams, gamma: f64) -> Result<Self> {
        Self::new(params, Mode::Theta { gamma })
    }

    pub fn with_max_time(mut self, max_time: f64) -> Result<Self> {
        if !(max_time > 0.0) {
            return Err(Error::Config("max_time must be positive"));
        }
        self.max_time = max_time;
        Ok(self)
    }

    pub fn with_record_path(mut self, record_path: bool) -> Self {
        self.record_path = record_path;
        self
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Resolved threshold: `R` for `τ`, `N^{-γ}` for `θ`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn n_threshold(&self) -> u64 {
        self.n_threshold
    }

    pub fn max_time(&self) -> f64 {
        self.max_time
    }

    pub fn record_path(&self) -> bool {
        self.record_path
    }

    /// Deterministic centring of the exit time: `ln N / (2a)` for `τ`,
    /// `(1/2 - γ) ln N / a` for `θ`.
    pub fn time_shift(&self) -> f64 {
        let a = lyapunov(self.params.beta());
        let ln_n = math::ln(self.params.n());
        match self.mode {
            Mode::Tau(_) => ln_n / (2.0 * a),
            Mode::Theta { gamma } => (0.5 - gamma) * ln_n / a,
        }
    }

    /// Limit law of `exit_time - time_shift()`.
    pub fn limit_law(&self) -> Result<LimitLaw> {
        match self.mode {
            Mode::Tau(_) => Ok(TheoryConstants::new(self.params.beta(), self.radius)?.limit_law()),
            Mode::Theta { .. } => LimitLaw::theta(lyapunov(self.params.beta())),
        }
    }
}

/// Outcome of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExitSample {
    /// Sign of the magnetization at exit (`+1` if a truncated run ends at 0).
    pub sign: i8,
    /// Exit instant, or `max_time` for a truncated run.
    pub exit_time: f64,
    pub n_jumps: u64,
    pub seed: u64,
    /// The clock passed `max_time` before the threshold was reached.
    pub truncated: bool,
}

/// Jump rates of one state of the table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEntry {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub lambda_total: f64,
    pub p_plus: f64,
    pub inv_total: f64,
}

/// Jump rates for every even imbalance in `[-n_threshold, n_threshold]`.
#[derive(Debug, Clone)]
pub struct RateTable {
    n_threshold: u64,
    entries: Vec<RateEntry>,
}

impl RateTable {
    pub fn new(params: &ModelParams, n_threshold: u64) -> Result<Self> {
        if n_threshold > params.n_spins() {
            return Err(Error::Config("threshold count exceeds N"));
        }
        if !n_threshold.is_multiple_of(2) || n_threshold == 0 {
            return Err(Error::Config("threshold count must be positive and even"));
        }
        let top = n_threshold as i64;
        let entries = (-top..=top)
            .step_by(2)
            .map(|n| {
                let (lambda_plus, lambda_minus) = jump_rates(n as f64 / params.n(), params)?;
                let lambda_total = lambda_plus + lambda_minus;
                Ok(RateEntry {
                    lambda_plus,
                    lambda_minus,
                    lambda_total,
                    p_plus: lambda_plus / lambda_total,
                    inv_total: 1.0 / lambda_total,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RateTable {
            n_threshold,
            entries,
        })
    }

    pub fn for_config(config: &SimConfig) -> Result<Self> {
        Self::new(&config.params, config.n_threshold)
    }

    /// Entry for imbalance `n`, if `|n| ≤ n_threshold` and `n` is even.
    pub fn get(&self, n: i64) -> Option<&RateEntry> {
        if n % 2 != 0 || n.unsigned_abs() > self.n_threshold {
            return None;
        }
        self.entries
            .get(((n + self.n_threshold as i64) / 2) as usize)
    }

    pub fn entries(&self) -> &[RateEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Smallest and largest `λ / N` over the table.
    pub fn total_rate_range(&self, params: &ModelParams) -> (f64, f64) {
        self.entries
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), e| {
                let v = e.lambda_total / params.n();
                (lo.min(v), hi.max(v))
            })
    }
}

/// Recorded jump times of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    params: ModelParams,
    /// `(t, n)` after each jump, starting with `(0, 0)`.
    points: Vec<(f64, i64)>,
    end_time: f64,
}

impl Path {
    pub fn points(&self) -> &[(f64, i64)] {
        &self.points
    }

    /// Time at which the trajectory was stopped.
    pub fn end_time(&self) -> f64 {
        self.end_time
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
}

/// A sample plus, when the configuration asks for it, its path.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub sample: ExitSample,
    pub path: Option<Path>,
}

trait Recorder {
    fn record(&mut self, t: f64, n: i64);
}

struct NoRecord;

impl Recorder for NoRecord {
    #[inline(always)]
    fn record(&mut self, _: f64, _: i64) {}
}

impl Recorder for Vec<(f64, i64)> {
    #[inline]
    fn record(&mut self, t: f64, n: i64) {
        self.push((t, n));
    }
}

/// A configuration together with its precomputed rate table.
#[derive(Debug, Clone)]
pub struct Sampler {
    config: SimConfig,
    table: RateTable,
}

impl Sampler {
    pub fn new(config: SimConfig) -> Result<Self> {
        let table = RateTable::for_config(&config)?;
        Ok(Sampler { config, table })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn table(&self) -> &RateTable {
        &self.table
    }

    /// Exit sample for `seed`; never records a path.
    pub fn sample(&self, seed: u64) -> ExitSample {
        self.simulate::<_, false>(seed, &mut NoRecord)
    }

    /// Exit sample and its full path.
    pub fn sample_with_path(&self, seed: u64) -> (ExitSample, Path) {
        let mut points = Vec::new();
        points.push((0.0, 0));
        let sample = self.simulate::<_, false>(seed, &mut points);
        let path = Path {
            params: self.config.params,
            points,
            end_time: sample.exit_time,
        };
        (sample, path)
    }

    /// Runs one trajectory, recording its path if the configuration says so.
    pub fn run(&self, seed: u64) -> Trajectory {
        if self.config.record_path {
            let (sample, path) = self.sample_with_path(seed);
            Trajectory {
                sample,
                path: Some(path),
            }
        } else {
            Trajectory {
                sample: self.sample(seed),
                path: None,
            }
        }
    }

    /// The same random stream with every direction decision reflected;
    /// produces the mirror image of [`Sampler::sample_with_path`].
    #[doc(hidden)]
    pub fn sample_mirrored_with_path(&self, seed: u64) -> (ExitSample, Path) {
        let mut points = Vec::new();
        points.push((0.0, 0));
        let sample = self.simulate::<_, true>(seed, &mut points);
        let path = Path {
            params: self.config.params,
            points,
            end_time: sample.exit_time,
        };
        (sample, path)
    }

    fn simulate<R: Recorder, const MIRROR: bool>(&self, seed: u64, recorder: &mut R) -> ExitSample {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let entries = self.table.entries.as_slice();
        let last = entries.len() - 1;
        let origin = last / 2;
        let mut idx = origin;
        let max_time = self.config.max_time;

        // Kahan-compensated clock.
        let mut clock = 0.0f64;
        let mut carry = 0.0f64;
        let mut jumps = 0u64;
        let mut truncated = false;

        loop {
            let entry = &entries[idx];
            let u = ((rng.next_u64() >> 11) + 1) as f64 * UNIT;
            let wait = -math::ln(u) * entry.inv_total;
            let y = wait - carry;
            let next = clock + y;
            carry = (next - clock) - y;
            clock = next;
            if clock > max_time {
                truncated = true;
                break;
            }
            let v = (rng.next_u64() >> 11) as f64 * UNIT;
            let up = if MIRROR {
                1.0 - v < entry.p_plus
            } else {
                v < entry.p_plus
            };
            idx = if up { idx + 1 } else { idx - 1 };
            jumps += 1;
            recorder.record(clock, (idx as i64 - origin as i64) * 2);
            if idx == 0 || idx == last {
                break;
            }
        }

        let sign = if idx < origin { -1 } else { 1 };
        ExitSample {
            sign,
            exit_time: if truncated { max_time } else { clock },
            n_jumps: jumps,
            seed,
            truncated,
        }
    }
}

/// Samples `τ_N` (or `θ_N`, whichever `config` describes) for one seed.
pub fn sample_exit(config: &SimConfig, seed: u64) -> Result<ExitSample> {
    Ok(Sampler::new(*config)?.sample(seed))
}

/// Samples `θ_N`; rejects configurations not in `θ` mode.
pub fn sample_theta(config: &SimConfig, seed: u64) -> Result<ExitSample> {
    match config.mode {
        Mode::Theta { .. } => sample_exit(config, seed),
        Mode::Tau(_) => Err(Error::Config(
            "sample_theta needs a theta-mode configuration",
        )),
    }
}

/// The process `Z(t) = M(t) - ∫₀ᵗ b(M(s)) ds` sampled right after each jump.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleSeries {
    beta: f64,
    n_spins: f64,
    end_time: f64,
    /// `(t_k, n_k, Z(t_k))`.
    knots: Vec<(f64, i64, f64)>,
}

impl MartingaleSeries {
    /// `(t, Z(t))` at time zero and after every jump.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.knots.iter().map(|&(t, _, z)| (t, z))
    }

    /// Value of the process stopped at the end of the trajectory,
    /// `Z(min(t, end))`. The integrand is constant between jumps, so the
    /// integral is exact.
    pub fn value_at(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.end_time);
        let k = self.knots.partition_point(|&(tk, _, _)| tk <= t).max(1) - 1;
        let (tk, n, z) = self.knots[k];
        z - drift(n as f64 / self.n_spins, self.beta) * (t - tk)
    }
}

/// Martingale residual of a recorded trajectory.
///
/// Returns [`Error::Usage`] when the trajectory was run without a path.
pub fn martingale_residual(trajectory: &Trajectory) -> Result<MartingaleSeries> {
    let path = trajectory
        .path
        .as_ref()
        .ok_or(Error::Usage("trajectory has no recorded path"))?;
    Ok(residual_of_path(path))
}

pub fn residual_of_path(path: &Path) -> MartingaleSeries {
    let beta = path.params.beta();
    let n_spins = path.params.n();
    let mut knots = Vec::with_capacity(path.points.len());
    let mut integral = 0.0;
    let mut prev: Option<(f64, i64)> = None;
    for &(t, n) in &path.points {
        if let Some((t0, n0)) = prev {
            integral += drift(n0 as f64 / n_spins, beta) * (t - t0);
        }
        knots.push((t, n, n as f64 / n_spins - integral));
        prev = Some((t, n));
    }
    MartingaleSeries {
        beta,
        n_spins,
        end_time: path.end_time,
        knots,
    }
}
