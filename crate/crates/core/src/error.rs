use alloc::boxed::Box;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("Hurst index {0} is outside the supported range [0.01, 0.99]")]
    HurstRange(f64),

    #[error("invalid sampling grid: {0}")]
    InvalidGrid(&'static str),

    #[error("covariance matrix is not numerically positive definite (pivot {pivot})")]
    Factorization { pivot: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("circulant embedding has a negative eigenvalue {value:e} at index {index}")]
    NegativeEigenvalue { index: usize, value: f64 },

    #[error("filter has order {0}; order >= 2 is required to annihilate the linear drift")]
    FilterOrderTooLow(usize),

    #[error("invalid filter: {0}")]
    InvalidFilter(&'static str),

    #[error("series of length {len} is too short for a filter with {needed} taps")]
    SeriesTooShort { len: usize, needed: usize },

    #[error("k-variation statistic {stat:e} is outside the attainable range [{lo:e}, {hi:e}]")]
    OutOfRange { stat: f64, lo: f64, hi: f64 },

    #[error("scale function is not monotone on the search interval")]
    NonMonotone,

    #[error("filter variance pi(0) = {0:e} is not positive")]
    ScaleDomain(f64),

    #[error("at least {needed} subjects are required, got {got}")]
    DegenerateSample { needed: usize, got: usize },

    #[error("effect variance must be positive, got {0}")]
    NonPositiveVariance(f64),

    #[error("panel grid does not match the covariance grid")]
    GridMismatch,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },

    #[error("cell (H={h}, N={subjects}, n={n_obs}): {inner}")]
    Cell {
        h: f64,
        subjects: usize,
        n_obs: usize,
        inner: Box<Error>,
    },
}
