use cwexit_core::sim::{derive_seed, Sampler, SimConfig, ThresholdSpec};
use cwexit_core::stats::{ks_statistic, sign_balance};
use cwexit_core::theory::exact_mean_exit;
use cwexit_core::ModelParams;

fn sampler(beta: f64, n: u64, spec: ThresholdSpec) -> Sampler {
    let params = ModelParams::low_temperature(beta, n).unwrap();
    Sampler::new(SimConfig::tau(params, spec).unwrap()).unwrap()
}

#[test]
fn two_spin_exit_is_exponential() {
    let m = 100_000;
    for beta in [1.2, 3.0] {
        let s = sampler(beta, 2, ThresholdSpec::Absolute(0.5));
        let samples: Vec<_> = (0..m).map(|i| s.sample(derive_seed(11, i))).collect();
        assert!(samples.iter().all(|x| x.n_jumps == 1 && !x.truncated));
        let times: Vec<f64> = samples.iter().map(|x| x.exit_time).collect();
        let d = ks_statistic(&times, |t| {
            if t <= 0.0 {
                0.0
            } else {
                1.0 - (-2.0 * t).exp()
            }
        })
        .unwrap();
        assert!(d < 1.63 / (m as f64).sqrt(), "beta={beta} d={d}");
        let (fraction, _) = sign_balance(samples.iter().map(|x| x.sign)).unwrap();
        assert!((fraction - 0.5).abs() <= 3.0 * (0.25 / m as f64).sqrt());
    }
}

#[test]
fn small_chain_mean_matches_exact_solution() {
    let m = 100_000;
    for (beta, n) in [(1.5, 50), (2.0, 30)] {
        let s = sampler(beta, n, ThresholdSpec::FractionOfMStar(0.5));
        let exact = exact_mean_exit(s.config().params(), s.config().n_threshold()).unwrap();
        let times: Vec<f64> = (0..m)
            .map(|i| s.sample(derive_seed(3, i)).exit_time)
            .collect();
        let mean = times.iter().sum::<f64>() / m as f64;
        let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0);
        let se = (var / m as f64).sqrt();
        assert!(
            (mean - exact).abs() <= 3.0 * se,
            "beta={beta} N={n} mean={mean} exact={exact}"
        );
    }
}

#[test]
fn paths_stay_even_and_stop_at_threshold() {
    let s = sampler(1.5, 200, ThresholdSpec::FractionOfMStar(0.6));
    let thr = s.config().n_threshold() as i64;
    for i in 0..200 {
        let (sample, path) = s.sample_with_path(derive_seed(5, i));
        let points = path.points();
        assert_eq!(points.len() as u64, sample.n_jumps + 1);
        for w in points.windows(2) {
            assert!(w[1].0 >= w[0].0);
            assert_eq!((w[1].1 - w[0].1).abs(), 2);
        }
        assert!(points.iter().all(|p| p.1 % 2 == 0 && p.1.abs() <= thr));
        let last = points.last().unwrap().1;
        assert_eq!(last.abs(), thr);
        assert_eq!(last.signum() as i8, sample.sign);
        assert_eq!(points.last().unwrap().0, sample.exit_time);
    }
}
