//! Simulation and estimation for linear fractional diffusions with Gaussian
//! random effects in the drift.
//!
//! Subjects follow `Y_i(t) = t * phi_i + W_i^H(t)` where `phi_i ~ N(mu, sigma2)`
//! and `W_i^H` are independent fractional Brownian motions sharing the Hurst
//! index `H`. The crate covers:
//!
//! * [`gram`]: the fBm covariance matrix on a sampling grid and the quadratic
//!   forms `u'V^{-1}u`, `u'V^{-1}y`,
//! * [`fbm`]: exact (factorization) and circulant-embedding path samplers,
//! * [`panel`]: random-effects panels and the `X -> Y` drift transform,
//! * [`hurst`]: k-variation estimation of `H` from a single trajectory,
//! * [`effects`]: closed-form estimators of `(mu, sigma2)` with their exact
//!   finite-sample moments, plug-in confidence intervals and the marginal
//!   likelihood,
//! * [`harness`]: replicated Monte Carlo experiments over `(H, N, n)` grids.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and the parallel runner live in the companion `mixfbm` crate.

#![cfg_attr(not(test), no_std)]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;

mod error;
mod fft;
mod math;
mod rng;

pub mod effects;
pub mod fbm;
pub mod gram;
pub mod harness;
pub mod hurst;
pub mod panel;

pub use error::{Error, Result};
pub use math::normal_quantile;
pub use rng::RngStream;

pub use effects::{EffectsEstimate, ExactMoments, Interval, Xi};
pub use fbm::{CirculantSampler, ExactSampler, FbmPath, PathSampler};
pub use gram::{GramMatrix, Hurst, SamplingGrid};
pub use harness::{CellSummary, ExperimentConfig, SamplerKind};
pub use hurst::{HurstEstimate, VariationFilter};
pub use panel::{EffectsLaw, Panel};
