//! Fractional Brownian motion covariance on a sampling grid.
//!
//! `V(H)[k][l] = (t_k^{2H} + t_l^{2H} - |t_k - t_l|^{2H}) / 2`. The matrix is
//! Cholesky-factored once at construction; every quadratic form afterwards
//! goes through triangular solves against that factor.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{abs, ln, powf};
use crate::{Error, Result};

/// Hurst index, restricted to `[0.01, 0.99]` so that `V(H)` stays
/// well-conditioned on the grids this crate targets.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Hurst(f64);

impl Hurst {
    pub const MIN: f64 = 0.01;
    pub const MAX: f64 = 0.99;

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (Self::MIN..=Self::MAX).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::HurstRange(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Strictly increasing observation times `t_1 < ... < t_n = T` with `t_1 > 0`.
/// The origin `t_0 = 0` is implicit and never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingGrid {
    times: Vec<f64>,
}

impl SamplingGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidGrid("grid must contain at least one time"));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("times must be finite"));
        }
        if times[0] <= 0.0 {
            return Err(Error::InvalidGrid("first observation time must be positive"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("times must be strictly increasing"));
        }
        Ok(Self { times })
    }

    /// `t_j = j T / n` for `j = 1..=n`; the last point is exactly `T`.
    pub fn uniform(n: usize, horizon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("grid must contain at least one time"));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidGrid("horizon must be positive and finite"));
        }
        let mut times: Vec<f64> = (1..=n)
            .map(|j| horizon * j as f64 / n as f64)
            .collect();
        times[n - 1] = horizon;
        Self::new(times)
    }

    #[inline]
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.times.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    #[inline]
    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// True when `t_j = j T / n` within a relative tolerance.
    pub fn is_uniform(&self, rel_tol: f64) -> bool {
        let n = self.len() as f64;
        let horizon = self.horizon();
        self.times
            .iter()
            .enumerate()
            .all(|(j, &t)| abs(t - horizon * (j + 1) as f64 / n) <= rel_tol * horizon)
    }

    /// Same times up to a relative tolerance.
    pub fn matches(&self, other: &SamplingGrid, rel_tol: f64) -> bool {
        self.len() == other.len()
            && self
                .times
                .iter()
                .zip(&other.times)
                .all(|(&a, &b)| abs(a - b) <= rel_tol * abs(a).max(abs(b)))
    }
}

/// fBm covariance at two times.
#[inline]
pub fn fbm_covariance(s: f64, t: f64, h: f64) -> f64 {
    let two_h = 2.0 * h;
    0.5 * (powf(s, two_h) + powf(t, two_h) - powf(abs(t - s), two_h))
}

/// Covariance matrix `V(H)` with its lower Cholesky factor and the cached
/// vector `V^{-1} u`.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    grid: SamplingGrid,
    hurst: Hurst,
    cov: Vec<f64>,
    factor: Vec<f64>,
    /// `V^{-1} u`
    weights: Vec<f64>,
    q: f64,
    log_det: f64,
}

impl GramMatrix {
    pub fn new(grid: SamplingGrid, hurst: Hurst) -> Result<Self> {
        let n = grid.len();
        let h = hurst.value();
        let t = grid.times().to_vec();

        let mut cov = vec![0.0; n * n];
        for k in 0..n {
            for l in 0..=k {
                let v = fbm_covariance(t[k], t[l], h);
                cov[k * n + l] = v;
                cov[l * n + k] = v;
            }
        }

        let factor = cholesky(&cov, n)?;
        let log_det = 2.0 * (0..n).map(|i| ln(factor[i * n + i])).sum::<f64>();

        let mut gram = Self {
            grid,
            hurst,
            cov,
            factor,
            weights: Vec::new(),
            q: 0.0,
            log_det,
        };
        let weights = gram.solve(gram.grid.times());
        gram.q = dot(gram.grid.times(), &weights);
        gram.weights = weights;
        Ok(gram)
    }

    #[inline]
    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    #[inline]
    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    /// Row-major `n x n` covariance.
    pub fn covariance(&self) -> &[f64] {
        &self.cov
    }

    /// Row-major lower-triangular factor `L` with `L L' = V`.
    pub fn factor(&self) -> &[f64] {
        &self.factor
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// `V^{-1} u` where `u` is the vector of observation times.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `u' V^{-1} u`.
    #[inline]
    pub fn quad_form_uu(&self) -> f64 {
        self.q
    }

    /// `u' V^{-1} y`.
    pub fn quad_form_uy(&self, y: &[f64]) -> Result<f64> {
        self.check_len(y)?;
        Ok(dot(&self.weights, y))
    }

    /// `y' V^{-1} y`.
    pub fn quad_form_yy(&self, y: &[f64]) -> Result<f64> {
        self.check_len(y)?;
        let w = self.forward(y);
        Ok(dot(&w, &w))
    }

    /// `V^{-1} b` by forward and back substitution.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x = self.forward(b);
        let l = &self.factor;
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= l[k * n + i] * x[k];
            }
            x[i] = s / l[i * n + i];
        }
        x
    }

    /// `L^{-1} b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let l = &self.factor;
        let mut x = vec![0.0; n];
        for i in 0..n {
            let row = &l[i * n..i * n + i];
            let s = b[i] - dot(row, &x[..i]);
            x[i] = s / l[i * n + i];
        }
        x
    }

    /// `L z`, i.e. a draw from `N(0, V)` when `z` is standard normal.
    pub fn colour(&self, z: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            out[i] = dot(&self.factor[i * n..i * n + i + 1], &z[..=i]);
        }
    }

    fn check_len(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: y.len(),
            });
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let row_j = &l[j * n..j * n + j];
        let d = a[j * n + j] - dot(row_j, row_j);
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Factorization { pivot: j });
        }
        let djj = crate::math::sqrt(d);
        l[j * n + j] = djj;
        for i in j + 1..n {
            let s = a[i * n + j] - dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
            l[i * n + j] = s / djj;
        }
    }
    Ok(l)
}
