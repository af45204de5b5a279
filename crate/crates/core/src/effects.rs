//! Closed-form estimation of the random-effect law `(mu, sigma2)` with `H`
//! known.
//!
//! Each subject is reduced to its generalized least-squares slope
//! `xi_i = u'V^{-1}Y_i / u'V^{-1}u`, which is exactly `N(mu, beta)` with
//! `beta = sigma2 + 1/q`, `q = u'V^{-1}u`. The estimators are the sample mean
//! of `xi` and its uncorrected sample variance minus `1/q`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::gram::GramMatrix;
use crate::math::{ln, sqrt};
use crate::normal_quantile;
use crate::panel::{EffectsLaw, Panel};
use crate::{Error, Result};

const GRID_TOL: f64 = 1e-12;

/// Per-subject slopes `xi_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Xi {
    values: Vec<f64>,
}

impl Xi {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::DegenerateSample { needed: 1, got: 0 });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn xi_values(panel: &Panel, gram: &GramMatrix) -> Result<Xi> {
    if !panel.grid().matches(gram.grid(), GRID_TOL) {
        return Err(Error::GridMismatch);
    }
    let q = gram.quad_form_uu();
    let values = panel
        .rows()
        .map(|row| gram.quad_form_uy(row).map(|v| v / q))
        .collect::<Result<Vec<_>>>()?;
    Xi::new(values)
}

/// Sample mean of `xi`.
pub fn estimate_mu(xi: &Xi) -> f64 {
    xi.values.iter().sum::<f64>() / xi.len() as f64
}

/// `(1/N) sum xi_i^2 - ((1/N) sum xi_i)^2 - 1/q`. May be negative.
pub fn estimate_sigma2(xi: &Xi, q: f64) -> Result<f64> {
    Ok(uncorrected_variance(xi)? - 1.0 / q)
}

fn uncorrected_variance(xi: &Xi) -> Result<f64> {
    let n = xi.len();
    if n < 2 {
        return Err(Error::DegenerateSample { needed: 2, got: n });
    }
    let nf = n as f64;
    let mean = estimate_mu(xi);
    let second = xi.values.iter().map(|v| v * v).sum::<f64>() / nf;
    Ok(second - mean * mean)
}

/// Finite-sample moments of the estimators for a given `sigma2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactMoments {
    /// `sqrt(sigma2/N + 1/(N q))`
    pub std_mu: f64,
    /// `(N-1)/N sigma2 - 1/(N q)`
    pub mean_sigma2: f64,
    /// `sqrt(2(N-1))/N (sigma2 + 1/q)`
    pub std_sigma2: f64,
}

/// Pass the true `sigma2` for experiment tables or an estimate for plug-in
/// reporting.
pub fn exact_moments(sigma2: f64, n_subjects: usize, q: f64) -> ExactMoments {
    let n = n_subjects as f64;
    let beta = sigma2 + 1.0 / q;
    ExactMoments {
        std_mu: sqrt(sigma2 / n + 1.0 / (n * q)),
        mean_sigma2: (n - 1.0) / n * sigma2 - 1.0 / (n * q),
        std_sigma2: sqrt(2.0 * (n - 1.0)) / n * beta,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectsEstimate {
    pub mu_hat: f64,
    /// Raw estimate; negative values are possible in small samples.
    pub sigma2_hat: f64,
    /// `u'V^{-1}u`
    pub q: f64,
    pub n_subjects: usize,
    /// `sigma2_hat + 1/q`, the estimated variance of `xi`.
    pub beta_hat: f64,
    /// Exact std of `mu_hat` with `sigma2_hat` plugged in.
    pub exact_std_mu: f64,
    /// Exact std of `sigma2_hat` with `sigma2_hat` plugged in.
    pub exact_std_sigma2: f64,
}

impl EffectsEstimate {
    pub fn sigma2_clamped(&self) -> f64 {
        self.sigma2_hat.max(0.0)
    }
}

pub fn estimate_effects(panel: &Panel, gram: &GramMatrix) -> Result<EffectsEstimate> {
    let xi = xi_values(panel, gram)?;
    effects_from_xi(&xi, gram.quad_form_uu())
}

pub fn effects_from_xi(xi: &Xi, q: f64) -> Result<EffectsEstimate> {
    let mu_hat = estimate_mu(xi);
    let sigma2_hat = estimate_sigma2(xi, q)?;
    let moments = exact_moments(sigma2_hat, xi.len(), q);
    Ok(EffectsEstimate {
        mu_hat,
        sigma2_hat,
        q,
        n_subjects: xi.len(),
        beta_hat: sigma2_hat + 1.0 / q,
        exact_std_mu: moments.std_mu,
        exact_std_sigma2: moments.std_sigma2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn centered(center: f64, half_width: f64) -> Self {
        Self {
            lo: center - half_width,
            hi: center + half_width,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }
}

/// Plug-in asymptotic intervals:
/// `mu_hat +- z sqrt(beta_hat/N)` and `sigma2_hat +- z beta_hat sqrt(2/N)`.
pub fn confidence_intervals(est: &EffectsEstimate, level: f64) -> Result<(Interval, Interval)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter {
            name: "level",
            reason: "must lie strictly between 0 and 1",
        });
    }
    if est.n_subjects < 2 {
        return Err(Error::DegenerateSample {
            needed: 2,
            got: est.n_subjects,
        });
    }
    let z = normal_quantile(0.5 * (1.0 + level));
    let n = est.n_subjects as f64;
    let beta = est.beta_hat.max(0.0);
    Ok((
        Interval::centered(est.mu_hat, z * sqrt(beta / n)),
        Interval::centered(est.sigma2_hat, z * beta * sqrt(2.0 / n)),
    ))
}

/// Sum over subjects of the log of `int N(Y_i; phi u, V) N(phi; mu, sigma2) dphi`.
pub fn log_marginal_likelihood(panel: &Panel, gram: &GramMatrix, law: EffectsLaw) -> Result<f64> {
    let sigma2 = law.sigma2();
    if !(sigma2 > 0.0) {
        return Err(Error::NonPositiveVariance(sigma2));
    }
    if !panel.grid().matches(gram.grid(), GRID_TOL) {
        return Err(Error::GridMismatch);
    }
    let n = gram.dim() as f64;
    let mu = law.mu();
    let q = gram.quad_form_uu();
    let precision = q + 1.0 / sigma2;
    let constant =
        -0.5 * n * ln(2.0 * PI) - 0.5 * ln(sigma2) - 0.5 * gram.log_det() - 0.5 * ln(precision);

    let mut total = 0.0;
    for row in panel.rows() {
        let yy = gram.quad_form_yy(row)?;
        let uy = gram.quad_form_uy(row)?;
        let cross = uy + mu / sigma2;
        total += constant - 0.5 * (mu * mu / sigma2 + yy - cross * cross / precision);
    }
    Ok(total)
}

/// `(1/(N T)) sum_i Y_i(T)`, the estimator that only uses the endpoint.
pub fn continuous_mu_tilde(panel: &Panel) -> f64 {
    let last = panel.n_obs() - 1;
    let horizon = panel.grid().horizon();
    panel.rows().map(|r| r[last]).sum::<f64>() / (panel.n_subjects() as f64 * horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{Hurst, SamplingGrid};
    use crate::panel::{simulate_panel, simulate_panel_with, ZeroNoise};
    use crate::RngStream;
    use alloc::vec;

    fn paper_grid() -> SamplingGrid {
        SamplingGrid::uniform(4, 5.0).unwrap()
    }

    fn gram(h: f64) -> GramMatrix {
        GramMatrix::new(paper_grid(), Hurst::new(h).unwrap()).unwrap()
    }

    #[test]
    fn xi_of_scaled_times() {
        let g = gram(0.3);
        let u = g.grid().times().to_vec();
        let rows = vec![u.iter().map(|t| 2.5 * t).collect(), u.iter().map(|t| -1.0 * t).collect()];
        let p = Panel::new(paper_grid(), rows).unwrap();
        let xi = xi_values(&p, &g).unwrap();
        assert!((xi.values()[0] - 2.5).abs() < 1e-12);
        assert!((xi.values()[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn xi_brownian_is_endpoint_slope() {
        let g = gram(0.5);
        let law = EffectsLaw::new(-2.0, 1.0).unwrap();
        let p = simulate_panel(5, paper_grid(), g.hurst(), law, &mut RngStream::new(1, 0)).unwrap();
        let xi = xi_values(&p, &g).unwrap();
        for (x, row) in xi.values().iter().zip(p.rows()) {
            assert!((x - row[3] / 5.0).abs() < 1e-12);
        }
        assert!((estimate_mu(&xi) - continuous_mu_tilde(&p)).abs() < 1e-12);
    }

    #[test]
    fn xi_noise_free_equals_effects() {
        let g = gram(0.85);
        let law = EffectsLaw::new(-2.0, 1.0).unwrap();
        let p = simulate_panel_with(&ZeroNoise::new(paper_grid()), 30, law, &mut RngStream::new(2, 0))
            .unwrap();
        let xi = xi_values(&p, &g).unwrap();
        for (x, phi) in xi.values().iter().zip(p.true_effects().unwrap()) {
            assert!((x - phi).abs() < 1e-12 * phi.abs().max(1.0));
        }
        let mean_phi = p.true_effects().unwrap().iter().sum::<f64>() / 30.0;
        assert!((continuous_mu_tilde(&p) - mean_phi).abs() < 1e-12);
    }

    #[test]
    fn grid_mismatch() {
        let g = gram(0.5);
        let p = Panel::new(SamplingGrid::uniform(4, 4.0).unwrap(), vec![vec![0.0; 4]]).unwrap();
        assert_eq!(xi_values(&p, &g), Err(Error::GridMismatch));
    }

    #[test]
    fn mu_and_sigma2_arithmetic() {
        assert_eq!(estimate_mu(&Xi::new(vec![4.5]).unwrap()), 4.5);
        assert_eq!(estimate_mu(&Xi::new(vec![1.0, 2.0, 3.0]).unwrap()), 2.0);
        let same = Xi::new(vec![0.7; 6]).unwrap();
        assert!((estimate_sigma2(&same, 5.0).unwrap() + 0.2).abs() < 1e-15);
        // uncorrected variance of (-1.2, 1.2) is 1.44; of (a +- sqrt(1.2)) it is 1.2
        let s = 1.2f64.sqrt();
        let xi = Xi::new(vec![3.0 - s, 3.0 + s]).unwrap();
        assert!((estimate_sigma2(&xi, 5.0).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(
            estimate_sigma2(&Xi::new(vec![1.0]).unwrap(), 5.0),
            Err(Error::DegenerateSample { needed: 2, got: 1 })
        );
        assert!(Xi::new(vec![]).is_err());
    }

    #[test]
    fn exact_moments_table_values() {
        let m = exact_moments(1.0, 50, 5.0);
        assert!((m.std_mu - 0.1549).abs() < 5e-5);
        assert!((m.std_sigma2 - 0.2376).abs() < 5e-5);
        assert!((m.mean_sigma2 - (0.98 - 0.004)).abs() < 1e-15);
        let m = exact_moments(1.0, 500, 5.0);
        assert!((m.std_mu - 0.0490).abs() < 5e-5);
        assert!((m.std_sigma2 - 0.0758).abs() < 5e-5);
    }

    fn est(mu: f64, sigma2: f64, beta: f64, n: usize) -> EffectsEstimate {
        EffectsEstimate {
            mu_hat: mu,
            sigma2_hat: sigma2,
            q: 5.0,
            n_subjects: n,
            beta_hat: beta,
            exact_std_mu: 0.0,
            exact_std_sigma2: 0.0,
        }
    }

    #[test]
    fn interval_widths() {
        let e = est(-2.0, 1.0, 1.2, 500);
        let (ci_mu, ci_s2) = confidence_intervals(&e, 0.95).unwrap();
        let z = 1.959_963_984_540_054;
        assert!((ci_mu.half_width() - z * (1.2f64 / 500.0).sqrt()).abs() < 1e-14);
        assert!((ci_mu.half_width() - 0.09602).abs() < 5e-6);
        assert!((ci_s2.half_width() - z * 1.2 * (2.0f64 / 500.0).sqrt()).abs() < 1e-14);
        let (a, b) = confidence_intervals(&e, 1e-300).unwrap();
        assert!(a.half_width() < 1e-250 && b.half_width() < 1e-250);
        assert!(confidence_intervals(&e, 1.5).is_err());
        assert!(confidence_intervals(&e, 0.0).is_err());
        assert!(confidence_intervals(&est(0.0, 0.0, 1.0, 1), 0.9).is_err());
    }

    /// `log int prod N(Y; phi u, V) N(phi; mu, sigma2) dphi` per subject by
    /// composite Simpson on `[mu - 10 sigma, mu + 10 sigma]`.
    fn quadrature_loglik(panel: &Panel, g: &GramMatrix, mu: f64, sigma2: f64) -> f64 {
        let n = g.dim();
        let sd = sigma2.sqrt();
        let log_cond = |y: &[f64], phi: f64| {
            let r: Vec<f64> = y.iter().zip(g.grid().times()).map(|(y, t)| y - phi * t).collect();
            let sol = g.solve(&r);
            let quad: f64 = r.iter().zip(&sol).map(|(a, b)| a * b).sum();
            -0.5 * n as f64 * (2.0 * PI).ln() - 0.5 * g.log_det() - 0.5 * quad
        };
        let log_prior =
            |phi: f64| -0.5 * (2.0 * PI * sigma2).ln() - 0.5 * (phi - mu).powi(2) / sigma2;
        let steps = 20_000;
        let (a, b) = (mu - 10.0 * sd, mu + 10.0 * sd);
        let h = (b - a) / steps as f64;
        panel
            .rows()
            .map(|y| {
                let logs: Vec<f64> = (0..=steps)
                    .map(|i| {
                        let phi = a + i as f64 * h;
                        log_cond(y, phi) + log_prior(phi)
                    })
                    .collect();
                let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let s: f64 = logs
                    .iter()
                    .enumerate()
                    .map(|(i, l)| {
                        let w = if i == 0 || i == steps {
                            1.0
                        } else if i % 2 == 1 {
                            4.0
                        } else {
                            2.0
                        };
                        w * (l - m).exp()
                    })
                    .sum();
                m + (s * h / 3.0).ln()
            })
            .sum()
    }

    #[test]
    fn likelihood_matches_quadrature() {
        for (h, mu, sigma2) in [(0.5, 0.0, 1.0), (0.85, -2.0, 1.0), (0.15, 1.5, 0.3)] {
            let g = gram(h);
            let law = EffectsLaw::new(mu, sigma2).unwrap();
            let p = simulate_panel(3, paper_grid(), g.hurst(), law, &mut RngStream::new(3, 0)).unwrap();
            let closed = log_marginal_likelihood(&p, &g, law).unwrap();
            let quad = quadrature_loglik(&p, &g, mu, sigma2);
            assert!((closed - quad).abs() < 1e-6, "H={h}: {closed} vs {quad}");
        }
    }

    #[test]
    fn likelihood_single_point_is_normal_density() {
        let grid = SamplingGrid::new(vec![1.0]).unwrap();
        for h in [0.2, 0.5, 0.9] {
            let g = GramMatrix::new(grid.clone(), Hurst::new(h).unwrap()).unwrap();
            let law = EffectsLaw::new(-2.0, 1.5).unwrap();
            let p = Panel::new(grid.clone(), vec![vec![-1.0], vec![-3.3], vec![0.4]]).unwrap();
            let v = 1.5 + 1.0;
            let want: f64 = [-1.0, -3.3, 0.4]
                .iter()
                .map(|y: &f64| -0.5 * (2.0 * PI * v).ln() - 0.5 * (y + 2.0).powi(2) / v)
                .sum();
            assert!((log_marginal_likelihood(&p, &g, law).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn likelihood_argmax_in_mu_is_mu_hat() {
        let g = gram(0.85);
        let law = EffectsLaw::new(-2.0, 1.0).unwrap();
        let p = simulate_panel(40, paper_grid(), g.hurst(), law, &mut RngStream::new(4, 0)).unwrap();
        let mu_hat = estimate_effects(&p, &g).unwrap().mu_hat;
        let ll = |mu: f64| log_marginal_likelihood(&p, &g, EffectsLaw::new(mu, 1.0).unwrap()).unwrap();
        let step = 1e-4;
        let best = (-200..=200)
            .map(|i| mu_hat + i as f64 * step)
            .max_by(|a, b| ll(*a).total_cmp(&ll(*b)))
            .unwrap();
        assert!((best - mu_hat).abs() <= step, "{best} vs {mu_hat}");
    }

    #[test]
    fn likelihood_rejects_zero_variance() {
        let g = gram(0.5);
        let p = Panel::new(paper_grid(), vec![vec![0.0; 4]]).unwrap();
        assert_eq!(
            log_marginal_likelihood(&p, &g, EffectsLaw::new(0.0, 0.0).unwrap()),
            Err(Error::NonPositiveVariance(0.0))
        );
    }

    #[test]
    fn mu_tilde_single_subject() {
        let p = Panel::new(paper_grid(), vec![vec![1.0, 2.0, 3.0, -10.0]]).unwrap();
        assert_eq!(continuous_mu_tilde(&p), -2.0);
    }
}
