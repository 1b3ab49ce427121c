//! The `cwexit` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use cwexit_core::sim::{derive_seed, SimConfig, ThresholdSpec};
use cwexit_core::stats::{fit_slope, gof_report, GofReport, LinearFit, ShiftedSample};
use cwexit_core::theory::{LimitLaw, TheoryConstants};
use cwexit_core::{model, ModelParams};
use serde::Serialize;

use crate::config::{
    ModeName, Settings, DEFAULT_BETA, DEFAULT_R_FRAC, DEFAULT_SAMPLES, DEFAULT_SEED,
};
use crate::ensemble::{default_workers, run_ensemble};
use crate::error::{Error, Result};
use crate::io::{read_samples, write_samples};
use crate::manifest::{manifest_path, RunManifest};

#[derive(Debug, Parser)]
#[command(
    name = "cwexit",
    version,
    about = "Exit times of the Curie-Weiss magnetization chain"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print m*, K(R), D(R) and the limit law of the centred exit time.
    Theory(TheoryArgs),
    /// Sample exit times and write them to a CSV file with a manifest.
    Simulate(SimulateArgs),
    /// Same as `simulate --mode theta`.
    Theta(SimulateArgs),
    /// Compare a sample file with its limit law.
    Analyze(AnalyzeArgs),
    /// Regress mean exit times on ln N.
    Scaling(ScalingArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    /// Exit threshold R (tau mode).
    #[arg(long, conflicts_with = "r_frac")]
    pub r: Option<f64>,
    /// Exit threshold as a fraction of m* (tau mode).
    #[arg(long)]
    pub r_frac: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON file of settings (a run manifest works); flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Number of spins (even).
    #[arg(long)]
    pub n: Option<u64>,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
    #[arg(long, value_enum)]
    pub mode: Option<ModeName>,
    /// Shrinking-ball exponent, 1/4 < gamma < 1/2 (theta mode).
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Master seed of the ensemble.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; the output does not depend on it.
    #[arg(long, env = "CW_THREADS")]
    pub threads: Option<usize>,
    /// Output CSV; the manifest goes next to it as `<stem>.manifest.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Censoring time; runs still inside the ball are marked truncated.
    #[arg(long)]
    pub max_time: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Sample CSV written by `simulate`.
    pub csv: PathBuf,
    /// Manifest of the run (default: next to the CSV).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Write the report as JSON to this path (`-` for stdout).
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Exit with code 1 if the KS distance exceeds this value.
    #[arg(long)]
    pub assert_ks: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[arg(long, default_value_t = DEFAULT_BETA)]
    pub beta: f64,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
    /// Comma-separated spin counts, at least three.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<u64>,
    /// Trajectories per N.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, env = "CW_THREADS")]
    pub threads: Option<usize>,
    /// Write the table and fit as JSON to this path (`-` for stdout).
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Exit with code 1 unless |slope - 1/(2a)| <= tol / (2a).
    #[arg(long)]
    pub assert_slope_tol: Option<f64>,
}

/// Parses the arguments, runs the command, and returns the exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Theory(args) => theory(&args),
        Command::Simulate(args) => simulate(args, "simulate", None),
        Command::Theta(args) => simulate(args, "theta", Some(ModeName::Theta)),
        Command::Analyze(args) => analyze(&args),
        Command::Scaling(args) => scaling(&args),
    }
}

fn threshold_spec(args: &ThresholdArgs) -> ThresholdSpec {
    match (args.r, args.r_frac) {
        (Some(r), _) => ThresholdSpec::Absolute(r),
        (None, f) => ThresholdSpec::FractionOfMStar(f.unwrap_or(DEFAULT_R_FRAC)),
    }
}

fn emit_json<T: Serialize>(value: &T, dest: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    if dest == Path::new("-") {
        print!("{text}");
        Ok(())
    } else {
        fs::write(dest, text).map_err(|e| Error::io(dest, e))
    }
}

#[derive(Debug, Serialize)]
struct QuantilePoint {
    q: f64,
    t: f64,
}

#[derive(Debug, Serialize)]
struct TheoryReport {
    beta: f64,
    a: f64,
    m_star: f64,
    m_star_residual: f64,
    #[serde(rename = "R")]
    r: f64,
    #[serde(rename = "K_R")]
    k_r: f64,
    #[serde(rename = "D_R")]
    d_r: f64,
    limit_mean: f64,
    limit_quantiles: Vec<QuantilePoint>,
}

fn theory(args: &TheoryArgs) -> Result<()> {
    let constants = match threshold_spec(&args.threshold) {
        ThresholdSpec::Absolute(r) => TheoryConstants::new(args.beta, r)?,
        ThresholdSpec::FractionOfMStar(f) => TheoryConstants::from_fraction(args.beta, f)?,
    };
    let law = constants.limit_law();
    let limit_quantiles = [0.05, 0.25, 0.5, 0.75, 0.95]
        .into_iter()
        .map(|q| {
            Ok(QuantilePoint {
                q,
                t: law.quantile(q)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = TheoryReport {
        beta: constants.beta,
        a: constants.a,
        m_star: constants.m_star,
        m_star_residual: constants.m_star_residual(),
        r: constants.r_threshold,
        k_r: constants.k_of_r,
        d_r: constants.d_of_r,
        limit_mean: law.mean(),
        limit_quantiles,
    };
    emit_json(&report, Path::new("-"))
}

fn simulate(args: SimulateArgs, subcommand: &str, forced: Option<ModeName>) -> Result<()> {
    if forced.is_some() && args.mode.is_some_and(|m| Some(m) != forced) {
        return Err(Error::Usage(format!(
            "`{subcommand}` cannot run in another mode"
        )));
    }
    let file = match &args.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let flags = Settings {
        beta: args.beta,
        n: args.n,
        mode: forced.or(args.mode),
        r: args.threshold.r,
        r_frac: args.threshold.r_frac,
        gamma: args.gamma,
        samples: args.samples,
        master_seed: args.seed,
        threads: args.threads,
        max_time: args.max_time,
        out: args.out,
        ..Default::default()
    };
    let resolved = flags.resolve(&file)?;
    let out = resolved
        .out
        .ok_or_else(|| Error::Usage("no output file: pass --out".into()))?;
    let workers = resolved.threads.unwrap_or_else(default_workers);
    let result = run_ensemble(
        &resolved.config,
        resolved.master_seed,
        resolved.samples,
        workers,
    )?;
    write_samples(&out, &result.samples, resolved.config.time_shift())?;
    RunManifest::new(
        subcommand,
        &resolved.config,
        resolved.samples,
        resolved.master_seed,
        workers,
    )
    .write(&manifest_path(&out))?;
    eprintln!(
        "{} trajectories ({} truncated) in {:.2?} on {} threads -> {}",
        result.samples.len(),
        result.truncated(),
        result.wall_time,
        workers,
        out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct AnalyzeReport {
    #[serde(flatten)]
    gof: GofReport,
    truncated: usize,
    law: LimitLaw,
}

fn print_gof(report: &GofReport, truncated: usize, law: &LimitLaw) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "samples          {} ({} truncated, excluded)",
        report.n, truncated
    );
    let _ = writeln!(
        out,
        "limit law        -(1/a) ln|Z| + shift, a = {}, shift = {}, sd(Z) = {}",
        law.a, law.shift, law.sigma
    );
    let _ = writeln!(
        out,
        "KS distance      {:.6}  (p = {:.4})",
        report.ks_distance, report.ks_pvalue
    );
    let _ = writeln!(
        out,
        "sign balance     {:.4} positive  (z = {:.3})",
        report.sign_fraction_plus, report.sign_zscore
    );
    let _ = writeln!(
        out,
        "mean             {:.6} empirical, {:.6} limit",
        report.mean_empirical, report.mean_theoretical
    );
    let _ = writeln!(out, "{:>6} {:>12} {:>12}", "q", "empirical", "limit");
    for row in &report.quantiles {
        let _ = writeln!(
            out,
            "{:>6.2} {:>12.6} {:>12.6}",
            row.q, row.empirical, row.theoretical
        );
    }
}

fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let rows = read_samples(&args.csv)?;
    let manifest_file = args
        .manifest
        .clone()
        .unwrap_or_else(|| manifest_path(&args.csv));
    let manifest = RunManifest::read(&manifest_file)?;
    if manifest.samples != rows.len() {
        return Err(Error::format(
            &args.csv,
            format!(
                "{} rows but the manifest records {} samples",
                rows.len(),
                manifest.samples
            ),
        ));
    }
    let law = manifest.sim_config(&manifest_file)?.limit_law()?;
    let shifted: Vec<ShiftedSample> = rows
        .iter()
        .filter(|r| !r.truncated)
        .map(|r| ShiftedSample {
            value: r.shifted_time,
            sign: r.sign,
        })
        .collect();
    let truncated = rows.len() - shifted.len();
    if shifted.is_empty() {
        return Err(Error::Usage("every sample is truncated".into()));
    }
    let gof = gof_report(&shifted, &law)?;
    print_gof(&gof, truncated, &law);
    if let Some(dest) = &args.json {
        emit_json(
            &AnalyzeReport {
                gof: gof.clone(),
                truncated,
                law,
            },
            dest,
        )?;
    }
    if let Some(limit) = args.assert_ks {
        if gof.ks_distance > limit {
            return Err(Error::Assertion(format!(
                "KS distance {} exceeds {}",
                gof.ks_distance, limit
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub n: u64,
    pub samples: usize,
    pub truncated: usize,
    pub mean_exit_time: f64,
    pub stderr: f64,
}

#[derive(Debug, Serialize)]
struct ScalingReport {
    beta: f64,
    a: f64,
    #[serde(rename = "R")]
    r: f64,
    expected_slope: f64,
    rows: Vec<ScalingRow>,
    fit: LinearFit,
}

/// Mean and standard error of the exit time over untruncated runs; each N uses
/// the master seed `derive_seed(seed, N)`.
pub fn scaling_rows(
    beta: f64,
    spec: ThresholdSpec,
    n_list: &[u64],
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<ScalingRow>> {
    n_list
        .iter()
        .map(|&n| {
            let config = SimConfig::tau(ModelParams::low_temperature(beta, n)?, spec)?;
            let result = run_ensemble(&config, derive_seed(seed, n), samples, workers)?;
            let times: Vec<f64> = result
                .samples
                .iter()
                .filter(|s| !s.truncated)
                .map(|s| s.exit_time)
                .collect();
            if times.len() < 2 {
                return Err(Error::Usage(format!("too few untruncated runs at N = {n}")));
            }
            let m = times.len() as f64;
            let mean = times.iter().sum::<f64>() / m;
            let var = times.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (m - 1.0);
            Ok(ScalingRow {
                n,
                samples,
                truncated: samples - times.len(),
                mean_exit_time: mean,
                stderr: (var / m).sqrt(),
            })
        })
        .collect()
}

fn scaling(args: &ScalingArgs) -> Result<()> {
    if args.n_list.len() < 3 {
        return Err(Error::Usage(
            "--n-list needs at least three values of N".into(),
        ));
    }
    let spec = threshold_spec(&args.threshold);
    // Validate the whole list before spending time on simulations.
    for &n in &args.n_list {
        SimConfig::tau(ModelParams::low_temperature(args.beta, n)?, spec)?;
    }
    let workers = args.threads.unwrap_or_else(default_workers);
    if workers == 0 {
        return Err(Error::Usage("thread count must be at least 1".into()));
    }
    let rows = scaling_rows(
        args.beta,
        spec,
        &args.n_list,
        args.samples,
        args.seed,
        workers,
    )?;
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_exit_time).collect();
    let fit = fit_slope(&xs, &ys)?;
    let a = model::lyapunov(args.beta);
    let expected = 1.0 / (2.0 * a);
    let radius = SimConfig::tau(
        ModelParams::low_temperature(args.beta, args.n_list[0])?,
        spec,
    )?
    .radius();

    {
        let mut out = std::io::stdout().lock();
        let _ = writeln!(
            out,
            "{:>10} {:>8} {:>10} {:>12} {:>10}",
            "N", "samples", "truncated", "mean tau", "stderr"
        );
        for r in &rows {
            let _ = writeln!(
                out,
                "{:>10} {:>8} {:>10} {:>12.6} {:>10.6}",
                r.n, r.samples, r.truncated, r.mean_exit_time, r.stderr
            );
        }
        let _ = writeln!(
            out,
            "slope {:.6} +- {:.6} (1/(2a) = {}), intercept {:.6}",
            fit.slope, fit.stderr_slope, expected, fit.intercept
        );
    }
    if let Some(dest) = &args.json {
        let report = ScalingReport {
            beta: args.beta,
            a,
            r: radius,
            expected_slope: expected,
            rows,
            fit,
        };
        emit_json(&report, dest)?;
    }
    if let Some(tol) = args.assert_slope_tol {
        if (fit.slope - expected).abs() > tol * expected {
            return Err(Error::Assertion(format!(
                "slope {} is not within {} relative of {}",
                fit.slope, tol, expected
            )));
        }
    }
    Ok(())
}
