//! Monte Carlo checks of the estimators' finite-sample and asymptotic laws.

use mixfbm_core::fbm::{CirculantSampler, PathSampler};
use mixfbm_core::harness::{CellRunner, ExperimentConfig, ReplicationOutcome, SamplerKind};
use mixfbm_core::hurst::{asym_variance_a, estimate_h, g_scale, s_n, VariationFilter};
use mixfbm_core::{Hurst, RngStream};

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt())
}

fn run_cell(h: f64, n_obs: usize, reps: usize, seed: u64) -> (Vec<ReplicationOutcome>, f64, f64) {
    let cfg = ExperimentConfig {
        h_list: vec![Hurst::new(h).unwrap()],
        n_subjects_list: vec![50],
        n_obs_list: vec![n_obs],
        replications: reps,
        base_seed: seed,
        sampler: SamplerKind::Exact,
        ..ExperimentConfig::reference()
    };
    let runner = CellRunner::new(&cfg, cfg.cells()[0]).unwrap();
    let outcomes: Vec<_> = (0..reps).map(|r| runner.replicate(r).unwrap()).collect();
    let s = runner.summarize(&outcomes);
    (outcomes, s.exact_std_mu, s.exact_std_sigma2)
}

#[test]
fn mu_unbiased_with_exact_variance_on_reference_grid() {
    let reps = 2000;
    for (i, h) in [0.15, 0.5, 0.85].into_iter().enumerate() {
        for (j, n_obs) in [4, 32, 256].into_iter().enumerate() {
            let (outcomes, exact_std_mu, exact_std_sigma2) =
                run_cell(h, n_obs, reps, 100 + (3 * i + j) as u64);
            let mus: Vec<f64> = outcomes.iter().map(|o| o.mu_hat).collect();
            let (m, s) = mean_std(&mus);
            assert!(
                (m + 2.0).abs() <= 4.0 * exact_std_mu / (reps as f64).sqrt(),
                "H={h} n={n_obs}: mean {m}"
            );
            assert!(
                (s - exact_std_mu).abs() <= 0.1 * exact_std_mu,
                "H={h} n={n_obs}: std {s} vs {exact_std_mu}"
            );

            let sig: Vec<f64> = outcomes.iter().map(|o| o.sigma2_hat.unwrap()).collect();
            let (ms, ss) = mean_std(&sig);
            let q = {
                // recover q from the exact std: std_mu^2 = (1 + 1/q)/N
                1.0 / (50.0 * exact_std_mu * exact_std_mu - 1.0)
            };
            let want = 49.0 / 50.0 - 1.0 / (50.0 * q);
            assert!(
                (ms - want).abs() <= 4.0 * exact_std_sigma2 / (reps as f64).sqrt(),
                "H={h} n={n_obs}: mean sigma2 {ms} vs {want}"
            );
            assert!(
                (ss - exact_std_sigma2).abs() <= 0.1 * exact_std_sigma2,
                "H={h} n={n_obs}: std sigma2 {ss} vs {exact_std_sigma2}"
            );
        }
    }
}

#[test]
fn standardized_mu_hat_is_gaussian_shaped() {
    let (outcomes, exact_std_mu, _) = run_cell(0.85, 32, 2000, 7);
    let z: Vec<f64> = outcomes.iter().map(|o| (o.mu_hat + 2.0) / exact_std_mu).collect();
    let (m, s) = mean_std(&z);
    let n = z.len() as f64;
    let skew = z.iter().map(|x| ((x - m) / s).powi(3)).sum::<f64>() / n;
    let kurt = z.iter().map(|x| ((x - m) / s).powi(4)).sum::<f64>() / n - 3.0;
    assert!(skew.abs() < 0.2, "skewness {skew}");
    assert!(kurt.abs() < 0.4, "excess kurtosis {kurt}");
}

#[test]
fn hurst_bias_small_at_4096() {
    let f = VariationFilter::diff2();
    for h in [0.15, 0.5, 0.85] {
        let s = CirculantSampler::new(1 << 12, 1.0, Hurst::new(h).unwrap()).unwrap();
        let hs: Vec<f64> = (0..100)
            .map(|r| estimate_h(&s.sample(&mut RngStream::new(21, r)).values, 1.0, 2.0, &f).unwrap().h_hat)
            .collect();
        let (m, _) = mean_std(&hs);
        assert!((m - h).abs() <= 0.01, "H={h}: {m}");
    }
}

#[test]
fn hurst_spread_matches_asym_std() {
    // the reported asym_std tracks the observed spread within 25%
    let f = VariationFilter::diff2();
    for h in [0.3, 0.5, 0.7] {
        let n = 1 << 14;
        let s = CirculantSampler::new(n, 1.0, Hurst::new(h).unwrap()).unwrap();
        let ests: Vec<_> = (0..200)
            .map(|r| estimate_h(&s.sample(&mut RngStream::new(22, r)).values, 1.0, 2.0, &f).unwrap())
            .collect();
        let hs: Vec<f64> = ests.iter().map(|e| e.h_hat).collect();
        let (_, sd) = mean_std(&hs);
        let predicted = asym_variance_a(h, 2.0, &f).sqrt() / (2.0 * (n as f64).sqrt() * (n as f64).ln());
        assert!((sd - predicted).abs() <= 0.25 * predicted, "H={h}: {sd} vs {predicted}");
        assert!((ests[0].asym_std - predicted).abs() <= 0.05 * predicted, "H={h}: asym_std {} vs {predicted}", ests[0].asym_std);
    }
}

#[test]
fn k4_series_matches_monte_carlo_variance() {
    // Var(S_n / E S_n) ~ A / (n - l) for Brownian input
    let f = VariationFilter::diff2();
    let n = 1 << 15;
    let k = 4.0;
    let a = asym_variance_a(0.5, k, &f);
    let g = g_scale(0.5, n, k, &f).unwrap();
    let s = CirculantSampler::new(n, 1.0, Hurst::new(0.5).unwrap()).unwrap();
    let ratios: Vec<f64> = (0..400)
        .map(|r| s_n(&s.sample(&mut RngStream::new(23, r)).values, k, &f).unwrap() / g)
        .collect();
    let (m, sd) = mean_std(&ratios);
    let scaled_var = sd * sd * (n - 2) as f64;
    assert!((m - 1.0).abs() < 0.01, "{m}");
    assert!((scaled_var - a).abs() <= 0.2 * a, "{scaled_var} vs {a}");
}

#[test]
fn horizon_generalization_recovers_h() {
    // estimating on the panel horizon T = 5 uses spacing T/n
    let f = VariationFilter::diff3();
    let h = 0.7;
    let s = CirculantSampler::new(2048, 5.0, Hurst::new(h).unwrap()).unwrap();
    let hs: Vec<f64> = (0..50)
        .map(|r| estimate_h(&s.sample(&mut RngStream::new(24, r)).values, 5.0, 2.0, &f).unwrap().h_hat)
        .collect();
    let (m, _) = mean_std(&hs);
    assert!((m - h).abs() < 0.01, "{m}");
}
