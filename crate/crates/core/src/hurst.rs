//! Hurst index estimation from one trajectory through discrete-filter
//! k-variations.
//!
//! A filter `gamma` of order `p >= 2` annihilates polynomials of degree
//! below `p`, in particular the linear random-effect drift `t * phi`, so the
//! k-variation statistic only sees the fBm. Its expectation has the closed
//! form `Delta^{Hk} pi_H(0)^{k/2} E_k`, which is inverted by bisection.

use alloc::vec::Vec;

use crate::math::{abs, gamma, ln, powf, sqrt};
use crate::{Error, Result};

/// Filter coefficients with their certified order.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationFilter {
    coeffs: Vec<f64>,
    order: usize,
    /// `a_d = sum_q gamma_q gamma_{q+d}` for `d = 0..=l`.
    autocorr: Vec<f64>,
}

impl VariationFilter {
    /// Certify the order of `coeffs` and reject anything below 2.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidFilter("a filter needs at least two coefficients"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidFilter("coefficients must be finite"));
        }
        if coeffs.iter().all(|&c| c == 0.0) {
            return Err(Error::InvalidFilter("coefficients are all zero"));
        }

        let order = (0..coeffs.len())
            .find(|&r| {
                let (sum, scale) = coeffs.iter().enumerate().fold((0.0, 0.0), |(s, a), (j, &g)| {
                    // 0^0 = 1
                    let w = if r == 0 { g } else { powf(j as f64, r as f64) * g };
                    (s + w, a + abs(w))
                });
                abs(sum) > 1e-10 * scale
            })
            .unwrap_or(coeffs.len());
        if order < 2 {
            return Err(Error::FilterOrderTooLow(order));
        }

        let l = coeffs.len() - 1;
        let autocorr = (0..=l)
            .map(|d| (0..=l - d).map(|q| coeffs[q] * coeffs[q + d]).sum())
            .collect();
        Ok(Self {
            coeffs,
            order,
            autocorr,
        })
    }

    /// Second differences `(1, -2, 1)`.
    pub fn diff2() -> Self {
        Self::new([1.0, -2.0, 1.0].into()).expect("order 2")
    }

    /// Third differences `(-1, 3, -3, 1)`.
    pub fn diff3() -> Self {
        Self::new([-1.0, 3.0, -3.0, 1.0].into()).expect("order 3")
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Index of the last coefficient (`l` for `gamma_0..gamma_l`).
    pub fn span(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// `pi_t(j) = -1/2 sum_{q,r} gamma_q gamma_r |q - r + j|^{2t}`, the lag-`j`
/// autocovariance of the filtered unit-spacing fBm with index `t`.
pub fn pi_gamma(t: f64, j: i64, f: &VariationFilter) -> f64 {
    let l = f.span();
    let j = j.unsigned_abs() as usize;
    if j > 8 * l {
        return pi_gamma_far(t, j, f);
    }
    let two_t = 2.0 * t;
    let a = &f.autocorr;
    let jf = j as f64;
    let mut s = a[0] * powf(jf, two_t);
    for d in 1..=l {
        let df = d as f64;
        s += a[d] * (powf(jf + df, two_t) + powf(abs(jf - df), two_t));
    }
    -0.5 * s
}

/// Far-lag evaluation by the binomial expansion of `(1 + d/j)^{2t}`; the
/// first `2p` moments of the filter autocorrelation vanish, which removes
/// the cancellation that ruins the direct sum at large `j`.
fn pi_gamma_far(t: f64, j: usize, f: &VariationFilter) -> f64 {
    let two_t = 2.0 * t;
    let jf = j as f64;
    let a = &f.autocorr;
    let start = 2 * f.order();

    let mut binom = 1.0;
    for i in 0..start {
        binom *= (two_t - i as f64) / (i + 1) as f64;
    }
    let mut sum = 0.0;
    let mut m = start;
    while m < start + 80 {
        // odd moments vanish by symmetry of a_d
        let moment: f64 = 2.0
            * (1..a.len())
                .map(|d| a[d] * powf(d as f64 / jf, m as f64))
                .sum::<f64>();
        let term = binom * moment;
        sum += term;
        if m > start && abs(term) <= 1e-18 * abs(sum) {
            break;
        }
        binom *= (two_t - m as f64) / (m + 1) as f64;
        binom *= (two_t - (m + 1) as f64) / (m + 2) as f64;
        m += 2;
    }
    -0.5 * powf(jf, two_t) * sum
}

/// `E|Z|^k` for a standard normal `Z`: `2^{k/2} Gamma((k+1)/2) / Gamma(1/2)`.
pub fn e_k(k: f64) -> f64 {
    powf(2.0, k / 2.0) * gamma((k + 1.0) / 2.0) / sqrt(core::f64::consts::PI)
}

/// Mean of `|sum_q gamma_q Y((i - q)/n)|^k` over the windows `i = l..n-1`.
///
/// `y[m]` holds `Y(t_{m+1})` and `Y(t_0) = 0`, so the last observation is
/// never used.
pub fn s_n(y: &[f64], k: f64, f: &VariationFilter) -> Result<f64> {
    let n = y.len();
    let l = f.span();
    if n <= l {
        return Err(Error::SeriesTooShort { len: n, needed: l + 1 });
    }
    let at = |m: usize| if m == 0 { 0.0 } else { y[m - 1] };
    let mut total = 0.0;
    for i in l..n {
        let mut v = 0.0;
        for (q, &g) in f.coeffs().iter().enumerate() {
            v += g * at(i - q);
        }
        total += if k == 2.0 { v * v } else { powf(abs(v), k) };
    }
    Ok(total / (n - l) as f64)
}

/// `g_{n,k,gamma}(t) = n^{-tk} pi_t(0)^{k/2} E_k` (unit horizon).
pub fn g_scale(t: f64, n: usize, k: f64, f: &VariationFilter) -> Result<f64> {
    let pi0 = pi_gamma(t, 0, f);
    if !(pi0 > 0.0) {
        return Err(Error::ScaleDomain(pi0));
    }
    Ok(powf(n as f64, -t * k) * powf(pi0, k / 2.0) * e_k(k))
}

/// Expected k-variation for grid spacing `spacing`:
/// `spacing^{tk} pi_t(0)^{k/2} E_k`. Equals [`g_scale`] when `spacing = 1/n`.
pub fn g_spacing(t: f64, spacing: f64, k: f64, f: &VariationFilter) -> Result<f64> {
    let pi0 = pi_gamma(t, 0, f);
    if !(pi0 > 0.0) {
        return Err(Error::ScaleDomain(pi0));
    }
    Ok(powf(spacing, t * k) * powf(pi0, k / 2.0) * e_k(k))
}

/// Point estimate of `H` and its asymptotic standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct HurstEstimate {
    pub h_hat: f64,
    pub k: f64,
    pub filter: VariationFilter,
    pub n: usize,
    /// `sqrt(A(h_hat, k, gamma)) / (k sqrt(n) log n)`
    pub asym_std: f64,
    /// The k-variation statistic that was inverted.
    pub statistic: f64,
}

pub const SEARCH_LO: f64 = 0.01;
pub const SEARCH_HI: f64 = 0.99;
pub const BISECTION_TOL: f64 = 1e-10;
const BISECTION_MAX_ITER: usize = 200;

/// Estimate `H` from one trajectory observed at `t_j = j T / n`.
pub fn estimate_h(y: &[f64], horizon: f64, k: f64, f: &VariationFilter) -> Result<HurstEstimate> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: "must be positive and finite",
        });
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidParameter {
            name: "horizon",
            reason: "must be positive and finite",
        });
    }
    let n = y.len();
    let stat = s_n(y, k, f)?;
    let h_hat = invert_scale(stat, horizon / n as f64, k, f)?;
    let asym_std = sqrt(asym_variance_a(h_hat, k, f)) / (k * sqrt(n as f64) * ln(n as f64));
    Ok(HurstEstimate {
        h_hat,
        k,
        filter: f.clone(),
        n,
        asym_std,
        statistic: stat,
    })
}

/// Solve `g_spacing(t) = stat` on `[0.01, 0.99]` by bisection.
pub fn invert_scale(stat: f64, spacing: f64, k: f64, f: &VariationFilter) -> Result<f64> {
    let g = |t: f64| g_spacing(t, spacing, k, f);
    let (g_lo, g_mid, g_hi) = (g(SEARCH_LO)?, g(0.5)?, g(SEARCH_HI)?);
    let decreasing = g_lo > g_hi;
    let monotone = if decreasing {
        g_lo > g_mid && g_mid > g_hi
    } else {
        g_lo < g_mid && g_mid < g_hi
    };
    if !monotone {
        return Err(Error::NonMonotone);
    }
    let (lo, hi) = if decreasing { (g_hi, g_lo) } else { (g_lo, g_hi) };
    if !(stat >= lo && stat <= hi) {
        return Err(Error::OutOfRange { stat, lo, hi });
    }

    let (mut a, mut b) = (SEARCH_LO, SEARCH_HI);
    for _ in 0..BISECTION_MAX_ITER {
        if b - a <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (a + b);
        if (g(mid)? > stat) == decreasing {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

const RHO_TOL: f64 = 1e-12;
const RHO_MAX_LAG: usize = 100_000;
const SERIES_REL_TOL: f64 = 1e-14;
const SERIES_MAX_TERMS: usize = 50;

/// `A(t, k, gamma) = sum_{j>=1} (c_{2j}^k)^2 (2j)! sum_{i in Z} rho_t(i)^{2j}`
/// with `c_{2j}^k = prod_{q<j} (k - 2q) / (2j)!` and `rho_t = pi_t / pi_t(0)`.
pub fn asym_variance_a(t: f64, k: f64, f: &VariationFilter) -> f64 {
    let pi0 = pi_gamma(t, 0, f);
    let l = f.span();
    let mut rho_sq = Vec::new();
    for i in 1..=RHO_MAX_LAG {
        let r = pi_gamma(t, i as i64, f) / pi0;
        if i > l && abs(r) < RHO_TOL {
            break;
        }
        rho_sq.push(r * r);
    }

    let mut powers = rho_sq.clone();
    // (c_{2j})^2 (2j)! = P_j^2 / (2j)!, P_j = prod_{q<j} (k - 2q)
    let mut coef = 1.0;
    let mut total = 0.0;
    for j in 1..=SERIES_MAX_TERMS {
        let step = k - 2.0 * (j - 1) as f64;
        coef *= step * step / ((2 * j) * (2 * j - 1)) as f64;
        let lag_sum = 1.0 + 2.0 * powers.iter().sum::<f64>();
        let term = coef * lag_sum;
        total += term;
        if abs(term) < SERIES_REL_TOL * abs(total) {
            break;
        }
        for (p, r) in powers.iter_mut().zip(&rho_sq) {
            *p *= r;
        }
    }
    total
}
