//! Sample paths of normalized fractional Brownian motion.
//!
//! [`ExactSampler`] colours i.i.d. normals with the Cholesky factor of
//! `V(H)` and works on any grid. [`CirculantSampler`] is the Davies-Harte
//! construction on a uniform grid: fractional Gaussian noise is drawn by
//! embedding its Toeplitz covariance in a circulant of size `2n`, then
//! cumulatively summed and scaled to the horizon.

use alloc::vec;
use alloc::vec::Vec;

use crate::fft::{fft, Complex};
use crate::gram::{GramMatrix, Hurst, SamplingGrid};
use crate::math::{abs, powf, sqrt};
use crate::{Error, Result, RngStream};

/// Values of a path at the grid times; `W(0) = 0` is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct FbmPath {
    pub grid: SamplingGrid,
    pub values: Vec<f64>,
}

/// Anything that fills a buffer with one centred Gaussian path on its grid.
pub trait PathSampler {
    fn grid(&self) -> &SamplingGrid;

    fn sample_into(&self, rng: &mut RngStream, out: &mut [f64]);

    fn sample(&self, rng: &mut RngStream) -> FbmPath {
        let mut values = vec![0.0; self.grid().len()];
        self.sample_into(rng, &mut values);
        FbmPath {
            grid: self.grid().clone(),
            values,
        }
    }
}

/// Exact sampler: `L z` with `L L' = V(H)`.
#[derive(Debug, Clone)]
pub struct ExactSampler<'a> {
    gram: &'a GramMatrix,
}

impl<'a> ExactSampler<'a> {
    pub fn new(gram: &'a GramMatrix) -> Self {
        Self { gram }
    }
}

impl PathSampler for ExactSampler<'_> {
    fn grid(&self) -> &SamplingGrid {
        self.gram.grid()
    }

    fn sample_into(&self, rng: &mut RngStream, out: &mut [f64]) {
        let mut z = vec![0.0; self.gram.dim()];
        rng.fill_standard_normal(&mut z);
        self.gram.colour(&z, out);
    }
}

/// Draw from `N(0, V(H))` on an arbitrary grid.
pub fn sample_fbm_exact(grid: SamplingGrid, h: Hurst, rng: &mut RngStream) -> Result<FbmPath> {
    let gram = GramMatrix::new(grid, h)?;
    Ok(ExactSampler::new(&gram).sample(rng))
}

/// Autocovariance of unit-spacing fractional Gaussian noise at lag `k`.
#[inline]
pub fn fgn_autocovariance(k: usize, h: f64) -> f64 {
    let two_h = 2.0 * h;
    let k = k as f64;
    0.5 * (powf(k + 1.0, two_h) - 2.0 * powf(k, two_h) + powf(abs(k - 1.0), two_h))
}

/// Davies-Harte sampler on the uniform grid `t_j = j T / n`.
#[derive(Debug, Clone)]
pub struct CirculantSampler {
    grid: SamplingGrid,
    hurst: Hurst,
    /// `sqrt(lambda_k / 2n)` for the `2n` circulant eigenvalues.
    amplitudes: Vec<f64>,
    /// `(T / n)^H`
    scale: f64,
}

impl CirculantSampler {
    /// Relative threshold below which negative eigenvalues count as rounding.
    pub const NEGATIVE_TOL: f64 = 1e-10;

    pub fn new(n: usize, horizon: f64, hurst: Hurst) -> Result<Self> {
        let grid = SamplingGrid::uniform(n, horizon)?;
        let h = hurst.value();
        let m = 2 * n;

        // first row: r(0), r(1), ..., r(n), r(n-1), ..., r(1)
        let mut row = vec![Complex::ZERO; m];
        for k in 0..=n {
            row[k] = Complex::new(fgn_autocovariance(k, h), 0.0);
        }
        for k in n + 1..m {
            row[k] = row[m - k];
        }
        fft(&mut row);

        let max = row.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
        let mut amplitudes = Vec::with_capacity(m);
        for (index, c) in row.iter().enumerate() {
            let lambda = c.re;
            if lambda < -Self::NEGATIVE_TOL * max {
                return Err(Error::NegativeEigenvalue {
                    index,
                    value: lambda,
                });
            }
            amplitudes.push(sqrt(lambda.max(0.0) / m as f64));
        }

        Ok(Self {
            grid,
            hurst,
            amplitudes,
            scale: powf(horizon / n as f64, h),
        })
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }
}

impl PathSampler for CirculantSampler {
    fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    fn sample_into(&self, rng: &mut RngStream, out: &mut [f64]) {
        let n = self.grid.len();
        let mut w: Vec<Complex> = self
            .amplitudes
            .iter()
            .map(|&a| {
                let re = rng.standard_normal();
                let im = rng.standard_normal();
                Complex::new(a * re, a * im)
            })
            .collect();
        fft(&mut w);

        let mut acc = 0.0;
        for (o, c) in out.iter_mut().zip(&w[..n]) {
            acc += c.re;
            *o = self.scale * acc;
        }
    }
}

/// Draw on the uniform grid `t_j = j T / n` via circulant embedding.
pub fn sample_fbm_fast(n: usize, horizon: f64, h: Hurst, rng: &mut RngStream) -> Result<FbmPath> {
    Ok(CirculantSampler::new(n, horizon, h)?.sample(rng))
}
