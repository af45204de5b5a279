//! Replicated Monte Carlo experiments over `(H, N, n)` cells.
//!
//! Replication `r` of cell `c` draws from stream `c * R + r` of the base
//! seed, so any execution order yields the same per-replication results.
//! [`CellRunner::replicate`] is the unit of work; [`CellRunner::summarize`]
//! reduces outcomes in replication order.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::effects::{effects_from_xi, estimate_mu, exact_moments, xi_values, Xi};
use crate::fbm::{CirculantSampler, ExactSampler, PathSampler};
use crate::gram::{GramMatrix, Hurst, SamplingGrid};
use crate::hurst::{estimate_h, VariationFilter};
use crate::math::sqrt;
use crate::panel::{simulate_panel_with, EffectsLaw};
use crate::{Error, Result, RngStream};

pub const HISTOGRAM_BINS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    /// Cholesky colouring of i.i.d. normals.
    Exact,
    /// Davies-Harte circulant embedding.
    Circulant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub h_list: Vec<Hurst>,
    pub n_subjects_list: Vec<usize>,
    pub n_obs_list: Vec<usize>,
    pub horizon: f64,
    pub mu0: f64,
    pub sigma20: f64,
    pub replications: usize,
    pub k: f64,
    pub filter: VariationFilter,
    pub base_seed: u64,
    pub estimate_hurst: bool,
    pub sampler: SamplerKind,
}

impl ExperimentConfig {
    /// The simulation grid: H in {0.15, 0.5, 0.85}, N in {50, 500},
    /// n in {4, 32, 256}, T = 5, (mu, sigma2) = (-2, 1), 400 replications.
    pub fn reference() -> Self {
        Self {
            h_list: [0.15, 0.5, 0.85]
                .iter()
                .map(|&h| Hurst::new(h).expect("in range"))
                .collect(),
            n_subjects_list: vec![50, 500],
            n_obs_list: vec![4, 32, 256],
            horizon: 5.0,
            mu0: -2.0,
            sigma20: 1.0,
            replications: 400,
            k: 2.0,
            filter: VariationFilter::diff2(),
            base_seed: 0,
            estimate_hurst: false,
            sampler: SamplerKind::Exact,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason| Err(Error::InvalidParameter { name, reason });
        if self.replications == 0 {
            return bad("replications", "must be at least 1");
        }
        if self.h_list.is_empty() {
            return bad("h_list", "must not be empty");
        }
        if self.n_subjects_list.is_empty() || self.n_subjects_list.contains(&0) {
            return bad("n_subjects_list", "must be non-empty with positive entries");
        }
        if self.n_obs_list.is_empty() || self.n_obs_list.contains(&0) {
            return bad("n_obs_list", "must be non-empty with positive entries");
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad("horizon", "must be positive and finite");
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            return bad("k", "must be positive and finite");
        }
        EffectsLaw::new(self.mu0, self.sigma20)?;
        Ok(())
    }

    /// Cells in `h`-major, then `N`, then `n` order.
    pub fn cells(&self) -> Vec<CellSpec> {
        let mut out = Vec::new();
        for &h in &self.h_list {
            for &n_subjects in &self.n_subjects_list {
                for &n_obs in &self.n_obs_list {
                    out.push(CellSpec {
                        index: out.len(),
                        h,
                        n_subjects,
                        n_obs,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSpec {
    pub index: usize,
    pub h: Hurst,
    pub n_subjects: usize,
    pub n_obs: usize,
}

impl CellSpec {
    fn wrap(&self, err: Error) -> Error {
        Error::Cell {
            h: self.h.value(),
            subjects: self.n_subjects,
            n_obs: self.n_obs,
            inner: Box::new(err),
        }
    }
}

/// Estimates from one simulated panel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationOutcome {
    pub mu_hat: f64,
    /// `None` when the panel has a single subject.
    pub sigma2_hat: Option<f64>,
    /// `None` when not requested or when the k-variation fell out of range.
    pub h_hat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `bins + 1` increasing edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Uniform bins over `mean +- 4 std`; values outside land in the end
    /// bins so the counts always add up to the sample size. A zero spread
    /// falls back to `mean +- 0.5`.
    pub fn around_mean(samples: &[f64], bins: usize) -> Self {
        let (mean, std) = summarize_empirical(samples);
        let half = if std > 0.0 { 4.0 * std } else { 0.5 };
        let (lo, hi) = (mean - half, mean + half);
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + i as f64 * width).collect();
        let mut counts = vec![0; bins];
        for &x in samples {
            let idx = ((x - lo) / width) as isize;
            counts[idx.clamp(0, bins as isize - 1) as usize] += 1;
        }
        Self { edges, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HurstStats {
    pub mean: f64,
    pub emp_std: f64,
    pub successes: usize,
    pub failures: usize,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub h: f64,
    pub n_subjects: usize,
    pub n_obs: usize,
    pub replications: usize,
    /// `u'V^{-1}u` for the cell grid.
    pub q: f64,
    pub mean_mu_hat: f64,
    pub emp_std_mu: f64,
    pub exact_std_mu: f64,
    /// NaN when `N = 1`.
    pub mean_sigma2_hat: f64,
    pub emp_std_sigma2: f64,
    pub exact_std_sigma2: f64,
    /// `(N-1)/N sigma2_0 - 1/(N q)`
    pub exact_mean_sigma2: f64,
    pub hist_mu: Histogram,
    pub hist_sigma2: Option<Histogram>,
    pub hurst: Option<HurstStats>,
}

/// Arithmetic mean and population (divide by `R`) standard deviation.
pub fn summarize_empirical(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, sqrt(var))
}

enum Noise {
    Exact,
    Circulant(CirculantSampler),
}

/// Everything one cell needs, built once and shared by its replications.
pub struct CellRunner<'a> {
    cfg: &'a ExperimentConfig,
    spec: CellSpec,
    gram: GramMatrix,
    noise: Noise,
    law: EffectsLaw,
}

impl core::fmt::Debug for CellRunner<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("CellRunner").field("spec", &self.spec).finish_non_exhaustive()
    }
}

impl<'a> CellRunner<'a> {
    pub fn new(cfg: &'a ExperimentConfig, spec: CellSpec) -> Result<Self> {
        let build = || -> Result<Self> {
            let grid = SamplingGrid::uniform(spec.n_obs, cfg.horizon)?;
            let gram = GramMatrix::new(grid, spec.h)?;
            let noise = match cfg.sampler {
                SamplerKind::Exact => Noise::Exact,
                SamplerKind::Circulant => {
                    Noise::Circulant(CirculantSampler::new(spec.n_obs, cfg.horizon, spec.h)?)
                }
            };
            Ok(Self {
                cfg,
                spec,
                gram,
                noise,
                law: EffectsLaw::new(cfg.mu0, cfg.sigma20)?,
            })
        };
        build().map_err(|e| spec.wrap(e))
    }

    pub fn spec(&self) -> CellSpec {
        self.spec
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn stream_id(&self, rep: usize) -> u64 {
        (self.spec.index * self.cfg.replications + rep) as u64
    }

    pub fn replicate(&self, rep: usize) -> Result<ReplicationOutcome> {
        self.replicate_inner(rep).map_err(|e| self.spec.wrap(e))
    }

    fn replicate_inner(&self, rep: usize) -> Result<ReplicationOutcome> {
        let mut rng = RngStream::new(self.cfg.base_seed, self.stream_id(rep));
        let n_subjects = self.spec.n_subjects;
        let panel = match &self.noise {
            Noise::Exact => {
                simulate_panel_with(&ExactSampler::new(&self.gram), n_subjects, self.law, &mut rng)?
            }
            Noise::Circulant(s) => simulate_panel_with(s as &dyn PathSampler, n_subjects, self.law, &mut rng)?,
        };
        let xi: Xi = xi_values(&panel, &self.gram)?;
        let (mu_hat, sigma2_hat) = if n_subjects >= 2 {
            let est = effects_from_xi(&xi, self.gram.quad_form_uu())?;
            (est.mu_hat, Some(est.sigma2_hat))
        } else {
            (estimate_mu(&xi), None)
        };
        let h_hat = if self.cfg.estimate_hurst {
            estimate_h(panel.row(0), self.cfg.horizon, self.cfg.k, &self.cfg.filter)
                .ok()
                .map(|e| e.h_hat)
        } else {
            None
        };
        Ok(ReplicationOutcome {
            mu_hat,
            sigma2_hat,
            h_hat,
        })
    }

    /// Reduce outcomes listed in replication order.
    pub fn summarize(&self, outcomes: &[ReplicationOutcome]) -> CellSummary {
        let q = self.gram.quad_form_uu();
        let exact = exact_moments(self.cfg.sigma20, self.spec.n_subjects, q);

        let mus: Vec<f64> = outcomes.iter().map(|o| o.mu_hat).collect();
        let (mean_mu_hat, emp_std_mu) = summarize_empirical(&mus);

        let sigmas: Vec<f64> = outcomes.iter().filter_map(|o| o.sigma2_hat).collect();
        let (mean_sigma2_hat, emp_std_sigma2, hist_sigma2) = if sigmas.is_empty() {
            (f64::NAN, f64::NAN, None)
        } else {
            let (m, s) = summarize_empirical(&sigmas);
            (m, s, Some(Histogram::around_mean(&sigmas, HISTOGRAM_BINS)))
        };

        let hurst = self.cfg.estimate_hurst.then(|| {
            let hs: Vec<f64> = outcomes.iter().filter_map(|o| o.h_hat).collect();
            let (mean, emp_std) = if hs.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                summarize_empirical(&hs)
            };
            HurstStats {
                mean,
                emp_std,
                successes: hs.len(),
                failures: outcomes.len() - hs.len(),
                histogram: Histogram::around_mean(&hs, HISTOGRAM_BINS),
            }
        });

        CellSummary {
            h: self.spec.h.value(),
            n_subjects: self.spec.n_subjects,
            n_obs: self.spec.n_obs,
            replications: outcomes.len(),
            q,
            mean_mu_hat,
            emp_std_mu,
            exact_std_mu: exact.std_mu,
            mean_sigma2_hat,
            emp_std_sigma2,
            exact_std_sigma2: exact.std_sigma2,
            exact_mean_sigma2: exact.mean_sigma2,
            hist_mu: Histogram::around_mean(&mus, HISTOGRAM_BINS),
            hist_sigma2,
            hurst,
        }
    }

    /// All replications of this cell, serially.
    pub fn run(&self) -> Result<CellSummary> {
        let outcomes = (0..self.cfg.replications)
            .map(|r| self.replicate(r))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.summarize(&outcomes))
    }
}

/// Run every cell serially.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<CellSummary>> {
    cfg.validate()?;
    cfg.cells()
        .into_iter()
        .map(|spec| CellRunner::new(cfg, spec)?.run())
        .collect()
}
