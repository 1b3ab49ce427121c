//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit status if
//! any criterion fails. Runs as part of `cargo test`.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use cwexit::cli::scaling_rows;
use cwexit::ensemble::{default_workers, run_ensemble};
use cwexit_core::model::{detailed_balance_residual, lyapunov};
use cwexit_core::sim::{derive_seed, martingale_residual, Sampler, SimConfig, ThresholdSpec};
use cwexit_core::stats::{fit_slope, ks_statistic, sign_balance, ShiftedSample};
use cwexit_core::theory::{
    correction_k, exact_mean_exit, shift_d, solve_m_star, transit_time, LimitLaw, TheoryConstants,
    EULER_GAMMA,
};
use cwexit_core::ModelParams;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

/// Master seed of every Monte Carlo criterion.
const SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn workers() -> usize {
    default_workers()
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn tau_config(beta: f64, n: u64, spec: ThresholdSpec) -> SimConfig {
    SimConfig::tau(ModelParams::low_temperature(beta, n).unwrap(), spec).unwrap()
}

fn detailed_balance() -> Outcome {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for &beta in &[1.2, 1.5, 2.0] {
        for &n_spins in &[2u64, 10, 100, 1000] {
            let params = ModelParams::new(beta, n_spins).unwrap();
            let n = n_spins as i64;
            for imbalance in (-n..n).step_by(2) {
                worst = worst.max(detailed_balance_residual(imbalance, &params).unwrap());
                checked += 1;
            }
        }
    }
    outcome(
        worst < 1e-12,
        format!("max residual {worst:.2e} over {checked} states (< 1e-12)"),
    )
}

fn analytic_micro_instance() -> Outcome {
    let m = 100_000;
    let config = tau_config(1.5, 2, ThresholdSpec::Absolute(0.5));
    let result = run_ensemble(&config, SEED, m, workers()).unwrap();
    let times: Vec<f64> = result.samples.iter().map(|s| s.exit_time).collect();
    let (mean, _) = mean_sd(&times);
    let (fraction, _) = sign_balance(result.samples.iter().map(|s| s.sign)).unwrap();
    let mean_tol = 3.0 * 0.5 / (m as f64).sqrt();
    let sign_tol = 3.0 * 0.00158;
    outcome(
        (mean - 0.5).abs() <= mean_tol && (fraction - 0.5).abs() <= sign_tol,
        format!(
            "mean {mean:.5} (|Δ| ≤ {mean_tol:.5}), sign fraction {fraction:.5} (|Δ| ≤ {sign_tol:.5})"
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let m = 100_000;
    let config = tau_config(1.5, 50, ThresholdSpec::FractionOfMStar(0.5));
    let exact = exact_mean_exit(config.params(), config.n_threshold()).unwrap();
    let result = run_ensemble(&config, SEED, m, workers()).unwrap();
    let times: Vec<f64> = result.samples.iter().map(|s| s.exit_time).collect();
    let (mean, sd) = mean_sd(&times);
    let se = sd / (m as f64).sqrt();
    outcome(
        (mean - exact).abs() <= 3.0 * se,
        format!(
            "simulated {mean:.5}, exact {exact:.5}, |Δ| = {:.5} ≤ 3·SE = {:.5}",
            (mean - exact).abs(),
            3.0 * se
        ),
    )
}

fn d_identity() -> Outcome {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(SEED);
    let mut uniform = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let mut worst = 0.0f64;
    for &beta in &[1.2, 1.5, 2.0, 3.0] {
        let m_star = solve_m_star(beta).unwrap();
        for _ in 0..5 {
            let x = (0.02 + 0.93 * uniform()) * m_star;
            let y = (0.02 + 0.93 * uniform()) * m_star;
            let (r1, r2) = (x.min(y), x.max(y));
            let lhs = shift_d(r2, beta).unwrap() - shift_d(r1, beta).unwrap();
            worst = worst.max((lhs - transit_time(r1, r2, beta).unwrap()).abs());
        }
    }
    outcome(
        worst < 1e-8,
        format!("max |D(r2) - D(r1) - t(r1, r2)| = {worst:.2e} (< 1e-8)"),
    )
}

fn k_limit() -> Outcome {
    let beta = 1.5;
    let a = lyapunov(beta);
    let r = 0.5 * solve_m_star(beta).unwrap();
    let delta = 1e-6;
    let gap = transit_time(delta, r, beta).unwrap()
        - (r / delta).ln() / a
        - correction_k(r, beta).unwrap();
    outcome(
        gap.abs() < 1e-6,
        format!(
            "|t(1e-6, r) - ln(r/1e-6)/a - K(r)| = {:.2e} (< 1e-6)",
            gap.abs()
        ),
    )
}

/// Shifted exit times of one ensemble, truncated runs removed.
fn shifted(config: &SimConfig, seed: u64, m: usize) -> (Vec<ShiftedSample>, usize) {
    let result = run_ensemble(config, seed, m, workers()).unwrap();
    let shift = config.time_shift();
    let kept: Vec<ShiftedSample> = result
        .samples
        .iter()
        .filter(|s| !s.truncated)
        .map(|s| ShiftedSample::from_exit(s, shift))
        .collect();
    let truncated = m - kept.len();
    (kept, truncated)
}

struct LimitRun {
    ks: Vec<(u64, f64, f64)>,
    mean_at_largest: f64,
    law: LimitLaw,
    truncated: usize,
}

fn limit_run() -> LimitRun {
    let beta = 1.5;
    let constants = TheoryConstants::from_fraction(beta, 0.5).unwrap();
    let law = constants.limit_law();
    let mut ks = Vec::new();
    let mut mean_at_largest = f64::NAN;
    let mut truncated = 0;
    for &n in &[1_000u64, 10_000, 100_000] {
        let config = tau_config(beta, n, ThresholdSpec::Absolute(constants.r_threshold));
        let (samples, cut) = shifted(&config, derive_seed(SEED, n), 10_000);
        truncated += cut;
        let values: Vec<f64> = samples.iter().map(|s| s.value).collect();
        let d = ks_statistic(&values, |t| law.cdf(t)).unwrap();
        let (_, z) = sign_balance(samples.iter().map(|s| s.sign)).unwrap();
        ks.push((n, d, z));
        mean_at_largest = values.iter().sum::<f64>() / values.len() as f64;
    }
    LimitRun {
        ks,
        mean_at_largest,
        law,
        truncated,
    }
}

fn limit_reproduction(run: &LimitRun) -> Outcome {
    let decreasing = run.ks.windows(2).all(|w| w[1].1 < w[0].1);
    let last = run.ks.last().unwrap().1;
    let signs_ok = run.ks.iter().all(|&(_, _, z)| z.abs() <= 3.0);
    let table: Vec<String> = run
        .ks
        .iter()
        .map(|(n, d, z)| format!("N={n}: KS {d:.4}, z {z:+.2}"))
        .collect();
    outcome(
        decreasing && last <= 0.05 && signs_ok && run.truncated == 0,
        format!(
            "{}; strictly decreasing: {decreasing}, KS(1e5) ≤ 0.05, |z| ≤ 3, {} truncated",
            table.join("; "),
            run.truncated
        ),
    )
}

fn mean_convergence(run: &LimitRun) -> Outcome {
    let target = run.law.shift + 0.5 * (EULER_GAMMA + std::f64::consts::LN_2);
    let gap = (run.mean_at_largest - target).abs();
    outcome(
        gap <= 0.1,
        format!(
            "mean {:.4} vs D(R) + (γ_E + ln 2)/2 = {target:.4}, |Δ| = {gap:.4} (≤ 0.1)",
            run.mean_at_largest
        ),
    )
}

fn scaling_slope() -> Outcome {
    let beta = 1.5;
    let ns = [1_000u64, 3_000, 10_000, 30_000, 100_000];
    let rows = scaling_rows(
        beta,
        ThresholdSpec::FractionOfMStar(0.5),
        &ns,
        2000,
        SEED,
        workers(),
    )
    .unwrap();
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_exit_time).collect();
    let fit = fit_slope(&xs, &ys).unwrap();
    let expected = 1.0 / (2.0 * lyapunov(beta));
    let truncated: usize = rows.iter().map(|r| r.truncated).sum();
    outcome(
        (fit.slope - expected).abs() <= 0.1 * expected && truncated == 0,
        format!(
            "slope {:.4} ± {:.4} vs 1/(2a) = {expected} (within 10%), {truncated} truncated",
            fit.slope, fit.stderr_slope
        ),
    )
}

fn theta_law() -> Outcome {
    let beta = 1.5;
    let config =
        SimConfig::theta(ModelParams::low_temperature(beta, 100_000).unwrap(), 0.35).unwrap();
    let law = LimitLaw::theta(lyapunov(beta)).unwrap();
    let (samples, truncated) = shifted(&config, SEED, 10_000);
    let values: Vec<f64> = samples.iter().map(|s| s.value).collect();
    let d = ks_statistic(&values, |t| law.cdf(t)).unwrap();
    outcome(
        d <= 0.08 && truncated == 0,
        format!(
            "KS {d:.4} (≤ 0.08), threshold count {}, {truncated} truncated",
            config.n_threshold()
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| -> Vec<u8> {
        let out = dir.path().join(format!("threads{threads}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_cwexit"))
            .args([
                "simulate", "--beta", "1.5", "--n", "1000", "--r-frac", "0.5",
            ])
            .args([
                "--samples",
                "3000",
                "--seed",
                "42",
                "--threads",
                threads,
                "--out",
            ])
            .arg(&out)
            .env_remove("CW_THREADS")
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        std::fs::read(out).unwrap()
    };
    let golden = run("1");
    let parallel = run("8");
    outcome(
        golden == parallel && !golden.is_empty(),
        format!(
            "--threads 1 and --threads 8 CSVs ({} bytes) byte-identical: {}",
            golden.len(),
            golden == parallel
        ),
    )
}

fn martingale() -> Outcome {
    let m = 10_000;
    let t_fix = 1.0;
    let config = tau_config(1.5, 100, ThresholdSpec::FractionOfMStar(0.5)).with_record_path(true);
    let sampler = Sampler::new(config).unwrap();
    let values: Vec<f64> = (0..m)
        .map(|i| {
            let trajectory = sampler.run(derive_seed(SEED, i as u64));
            martingale_residual(&trajectory).unwrap().value_at(t_fix)
        })
        .collect();
    let (mean, sd) = mean_sd(&values);
    let bound = 3.0 * sd / (m as f64).sqrt();
    outcome(
        mean.abs() <= bound,
        format!("mean Z(1) = {mean:.2e}, bound 3·sd/100 = {bound:.2e}"),
    )
}

fn main() -> ExitCode {
    let mut all_pass = true;
    let mut report = |id: u32, name: &str, budget: Duration, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = result.pass && in_time;
        all_pass &= pass;
        println!(
            "{} #{id:<2} {name}: {} [{:.2?}, budget {:?}]",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed,
            budget
        );
    };

    let secs = Duration::from_secs;
    report(1, "detailed balance", secs(1), &mut detailed_balance);
    report(
        2,
        "analytic micro-instance N=2",
        secs(5),
        &mut analytic_micro_instance,
    );
    report(
        3,
        "oracle equivalence N=50",
        secs(30),
        &mut oracle_equivalence,
    );
    report(4, "D-identity", secs(1), &mut d_identity);
    report(5, "K-limit", secs(1), &mut k_limit);
    let start = Instant::now();
    let run = limit_run();
    let limit_time = start.elapsed();
    report(6, "limit theorem reproduction", secs(600), &mut || {
        let mut o = limit_reproduction(&run);
        o.pass &= limit_time <= secs(600);
        o.detail
            .push_str(&format!(", ensemble time {limit_time:.2?}"));
        o
    });
    report(7, "mean convergence N=1e5", secs(600), &mut || {
        mean_convergence(&run)
    });
    report(8, "scaling slope", secs(300), &mut scaling_slope);
    report(9, "shrinking-ball exit law", secs(180), &mut theta_law);
    report(
        10,
        "determinism across thread counts",
        secs(10),
        &mut determinism,
    );
    report(11, "martingale diagnostic", secs(30), &mut martingale);

    if all_pass {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
