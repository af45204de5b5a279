//! Random-effects panels `Y_i(t_j) = t_j phi_i + W_i^H(t_j)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::fbm::{ExactSampler, PathSampler};
use crate::gram::{GramMatrix, Hurst, SamplingGrid};
use crate::math::sqrt;
use crate::{Error, Result, RngStream};

/// Gaussian law of the random drift `phi ~ N(mu, sigma2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectsLaw {
    mu: f64,
    sigma2: f64,
}

impl EffectsLaw {
    pub fn new(mu: f64, sigma2: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mu",
                reason: "must be finite",
            });
        }
        if !(sigma2.is_finite() && sigma2 >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "sigma2",
                reason: "must be finite and non-negative",
            });
        }
        Ok(Self { mu, sigma2 })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

/// `N` subjects observed on one shared grid, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    grid: SamplingGrid,
    values: Vec<f64>,
    true_effects: Option<Vec<f64>>,
}

impl Panel {
    /// Build from rows; every row must have one value per grid time.
    pub fn new(grid: SamplingGrid, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::DegenerateSample { needed: 1, got: 0 });
        }
        let n = grid.len();
        let mut values = Vec::with_capacity(rows.len() * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            values.extend(row);
        }
        Ok(Self {
            grid,
            values,
            true_effects: None,
        })
    }

    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    pub fn n_subjects(&self) -> usize {
        self.values.len() / self.grid.len()
    }

    pub fn n_obs(&self) -> usize {
        self.grid.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.grid.len())
    }

    /// Drift rates drawn during simulation; `None` for observed data.
    pub fn true_effects(&self) -> Option<&[f64]> {
        self.true_effects.as_deref()
    }
}

/// Simulate `n_subjects` paths with any path sampler. Per subject the stream
/// yields the effect draw first, then the noise path.
pub fn simulate_panel_with<S: PathSampler + ?Sized>(
    sampler: &S,
    n_subjects: usize,
    law: EffectsLaw,
    rng: &mut RngStream,
) -> Result<Panel> {
    if n_subjects == 0 {
        return Err(Error::DegenerateSample { needed: 1, got: 0 });
    }
    let grid = sampler.grid().clone();
    let n = grid.len();
    let sd = sqrt(law.sigma2());
    let mut values = vec![0.0; n_subjects * n];
    let mut effects = Vec::with_capacity(n_subjects);
    for row in values.chunks_exact_mut(n) {
        let phi = law.mu() + sd * rng.standard_normal();
        sampler.sample_into(rng, row);
        for (y, &t) in row.iter_mut().zip(grid.times()) {
            *y += t * phi;
        }
        effects.push(phi);
    }
    Ok(Panel {
        grid,
        values,
        true_effects: Some(effects),
    })
}

/// Simulate with the exact sampler on an arbitrary grid.
pub fn simulate_panel(
    n_subjects: usize,
    grid: SamplingGrid,
    h: Hurst,
    law: EffectsLaw,
    rng: &mut RngStream,
) -> Result<Panel> {
    let gram = GramMatrix::new(grid, h)?;
    simulate_panel_with(&ExactSampler::new(&gram), n_subjects, law, rng)
}

/// A sampler that always returns the zero path; isolates the effect term.
#[derive(Debug, Clone)]
pub struct ZeroNoise {
    grid: SamplingGrid,
}

impl ZeroNoise {
    pub fn new(grid: SamplingGrid) -> Self {
        Self { grid }
    }
}

impl PathSampler for ZeroNoise {
    fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    fn sample_into(&self, _rng: &mut RngStream, out: &mut [f64]) {
        out.fill(0.0);
    }
}

/// Remove the known drift from a raw trajectory:
/// `Y(t_j) = X(t_j) - X(t_0) - int_{t_0}^{t_j} a(X(s)) ds`.
///
/// `times` and `x` include the initial point. The integral uses the
/// trapezoidal rule on the observation grid, so it is exact for constant
/// drift and `O(dt^2)` otherwise. Returns values at `t_1..t_n`.
pub fn transform_to_y<F: Fn(f64) -> f64>(times: &[f64], x: &[f64], drift: F) -> Result<Vec<f64>> {
    if times.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            got: x.len(),
        });
    }
    if times.len() < 2 {
        return Err(Error::InvalidGrid("trajectory needs the initial point and one observation"));
    }
    let x0 = x[0];
    let mut integral = 0.0;
    let mut prev_a = drift(x0);
    let mut out = Vec::with_capacity(x.len() - 1);
    for j in 1..x.len() {
        let a = drift(x[j]);
        integral += 0.5 * (times[j] - times[j - 1]) * (a + prev_a);
        prev_a = a;
        out.push(x[j] - x0 - integral);
    }
    Ok(out)
}
