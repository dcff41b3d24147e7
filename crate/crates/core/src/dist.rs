//! Normal tail probabilities, Fisher's combination and the chi-squared(4) law.
//!
//! P-values are carried in log space wherever they feed a later
//! computation; a strong signal easily pushes a z-score past 38, where the
//! plain normal survival function underflows to zero.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

/// Largest double strictly below one.
const ONE_MINUS_ULP: f64 = 1.0 - f64::EPSILON / 2.0;

/// Above this point the log tail comes from the Mills-ratio continued fraction.
const ASYMPTOTIC_CUTOFF: f64 = 8.0;

/// Terms in the backward-evaluated continued fraction; ample for `x >= 8`.
const MILLS_TERMS: usize = 64;

/// A pair of p-values, each strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PValuePair {
    p_mean: f64,
    p_cov: f64,
}

impl PValuePair {
    pub fn new(p_mean: f64, p_cov: f64) -> Result<Self> {
        for p in [p_mean, p_cov] {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::PValueOutOfRange(p));
            }
        }
        Ok(Self { p_mean, p_cov })
    }

    pub fn p_mean(&self) -> f64 {
        self.p_mean
    }

    pub fn p_cov(&self) -> f64 {
        self.p_cov
    }
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteInput(x))
    }
}

/// Maps a probability into the open unit interval.
pub(crate) fn clamp_open(p: f64) -> f64 {
    p.clamp(f64::MIN_POSITIVE, ONE_MINUS_ULP)
}

fn upper_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// `1 - Phi(x)` for the standard normal, clamped into `(0, 1)`.
pub fn normal_sf(x: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(clamp_open(upper_tail(x)))
}

/// `ln(1 - Phi(x))`, finite for every finite `x`.
pub fn normal_log_sf(x: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(log_sf_unchecked(x))
}

pub(crate) fn log_sf_unchecked(x: f64) -> f64 {
    if x < -1.0 {
        (-upper_tail(-x)).ln_1p()
    } else if x <= ASYMPTOTIC_CUTOFF {
        upper_tail(x).ln()
    } else {
        log_mills_tail(x)
    }
}

/// `ln phi(x) + ln R(x)` where `R(x) = (1 - Phi(x)) / phi(x)` is evaluated by
/// the continued fraction `1 / (x + 1/(x + 2/(x + 3/(x + ...))))`.
fn log_mills_tail(x: f64) -> f64 {
    let mut t = x;
    for k in (1..=MILLS_TERMS).rev() {
        t = x + k as f64 / t;
    }
    let log_pdf = -0.5 * x * x - 0.5 * (2.0 * PI).ln();
    // x*x overflows past ~1.3e154; saturate instead of returning -inf.
    (log_pdf - t.ln()).max(-f64::MAX)
}

/// Fisher's statistic `-2 ln p_mean - 2 ln p_cov`.
pub fn fisher_combine(p: PValuePair) -> f64 {
    fisher_combine_log(p.p_mean.ln(), p.p_cov.ln())
}

/// Fisher's statistic from log p-values, immune to underflow.
pub fn fisher_combine_log(log_p_mean: f64, log_p_cov: f64) -> f64 {
    -2.0 * log_p_mean - 2.0 * log_p_cov
}

fn check_chi2_arg(t: f64) -> Result<()> {
    if t.is_nan() {
        return Err(Error::NonFiniteInput(t));
    }
    if t < 0.0 {
        return Err(Error::NegativeInput(t));
    }
    Ok(())
}

/// Survival function of chi-squared with four degrees of freedom,
/// `exp(-t/2) (1 + t/2)`.
pub fn chi2_4_sf(t: f64) -> Result<f64> {
    check_chi2_arg(t)?;
    if t == f64::INFINITY {
        return Ok(0.0);
    }
    Ok((-0.5 * t).exp() * (1.0 + 0.5 * t))
}

/// `ln` of [`chi2_4_sf`].
pub fn chi2_4_log_sf(t: f64) -> Result<f64> {
    check_chi2_arg(t)?;
    Ok(-0.5 * t + (0.5 * t).ln_1p())
}

/// Upper-`alpha` quantile of chi-squared(4).
///
/// Newton iteration on `ln sf(t) - ln alpha`, which is concave and
/// decreasing in `t`, started at `-2 ln alpha` (always left of the root)
/// and kept inside a bisection bracket.
pub fn chi2_4_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let target = alpha.ln();
    let h = |t: f64| -0.5 * t + (0.5 * t).ln_1p() - target;

    let mut lo = -2.0 * target;
    let mut hi = lo.max(1.0);
    while h(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut t = lo;
    for _ in 0..200 {
        let f = h(t);
        if f == 0.0 {
            return Ok(t);
        }
        if f > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let slope = -t / (2.0 * (2.0 + t));
        let newton = t - f / slope;
        let next = if slope < 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - t).abs() <= 4.0 * f64::EPSILON * t.max(f64::MIN_POSITIVE) || hi - lo <= f64::EPSILON * hi {
            return Ok(next);
        }
        t = next;
    }
    Ok(t)
}
