//! Detection and localization pipelines, plus the single-statistic and
//! Bonferroni comparators used by the simulation harness.

use serde::Serialize;

use crate::cov_change::{cov_stat_curve, CovStatResult};
use crate::dist::{self, clamp_open, log_sf_unchecked};
use crate::error::{Error, Result};
use crate::mean_change::{mean_stat_curve, MeanStatResult};
use crate::model::{gram, Dataset, LocalizationOutcome, StatCurve, TestOutcome};
use crate::scale::{calibrate, trace_sigma2_hat, Calibration};

/// Which procedure produced a [`BaselineOutcome`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Fisher,
    Bonferroni,
    MeanOnly,
    CovOnly,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Fisher, Method::Bonferroni, Method::MeanOnly, Method::CovOnly];

    pub fn name(self) -> &'static str {
        match self {
            Method::Fisher => "FISHER",
            Method::Bonferroni => "BONFERRONI",
            Method::MeanOnly => "MEAN_ONLY",
            Method::CovOnly => "COV_ONLY",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselineOutcome {
    pub method: Method,
    pub reject: bool,
    pub tau_hat: Option<usize>,
}

/// Every per-dataset quantity the pipelines need, computed once.
///
/// The Gram matrix is built a single time and dropped after the covariance
/// curve is swept.
#[derive(Debug, Clone)]
pub struct Analysis {
    n: usize,
    mean: MeanStatResult,
    cov: CovStatResult,
    calibration: Calibration,
}

impl Analysis {
    pub fn new(data: &Dataset) -> Result<Self> {
        let trace_hat = trace_sigma2_hat(data)?;
        let calibration = calibrate(trace_hat, data.n())?;
        let mean = mean_stat_curve(data);
        let cov = cov_stat_curve(data, &gram(data))?;
        Ok(Self { n: data.n(), mean, cov, calibration })
    }

    pub fn mean(&self) -> &MeanStatResult {
        &self.mean
    }

    pub fn cov(&self) -> &CovStatResult {
        &self.cov
    }

    pub fn calibration(&self) -> &Calibration {
        &self.calibration
    }

    pub fn detect(&self, alpha: f64) -> Result<TestOutcome> {
        check_alpha(alpha)?;
        let Calibration { trace_hat, sigma1_sq, sigma2_sq } = self.calibration;
        let z_mean = self.mean.aggregate / sigma1_sq.sqrt();
        let z_cov = self.cov.aggregate / sigma2_sq.sqrt();
        let log_p_mean = dist::normal_log_sf(z_mean)?;
        let log_p_cov = dist::normal_log_sf(z_cov)?;
        let t_n = dist::fisher_combine_log(log_p_mean, log_p_cov);
        let p_combined = dist::chi2_4_sf(t_n)?.max(f64::MIN_POSITIVE);
        Ok(TestOutcome {
            m_n: self.mean.aggregate,
            v_n: self.cov.aggregate,
            trace_hat,
            sigma1_sq,
            sigma2_sq,
            z_mean,
            z_cov,
            p_mean: clamp_open(log_p_mean.exp()),
            p_cov: clamp_open(log_p_cov.exp()),
            log_p_mean,
            log_p_cov,
            t_n,
            critical_value: dist::chi2_4_quantile(alpha)?,
            p_combined,
            alpha,
            reject: p_combined <= alpha,
        })
    }

    /// Localization grid `[max(floor(lambda n), 4), min(n - floor(lambda n), n - 4)]`.
    pub fn grid(&self, lambda: f64) -> Result<(usize, usize)> {
        if !(lambda > 0.0 && lambda < 0.5) {
            return Err(Error::BadParam(format!("lambda = {lambda} outside (0, 0.5)")));
        }
        let n = self.n;
        let margin = (lambda * n as f64).floor() as usize;
        let lo = margin.max(4);
        let hi = n.saturating_sub(margin).min(n - 4);
        if lo > hi {
            return Err(Error::EmptyGrid { lo, hi });
        }
        Ok((lo, hi))
    }

    /// `tau (n - tau) / n * M(tau) / sqrt(2 tr)` over the grid.
    fn standardized_mean(&self, lo: usize, hi: usize) -> impl Iterator<Item = f64> + '_ {
        let scale = (2.0 * self.calibration.trace_hat).sqrt();
        (lo..=hi).map(move |t| self.weight(t) * self.mean.per_tau.at(t) / scale)
    }

    /// `tau (n - tau) / n * V(tau) / (2 tr)` over the grid.
    fn standardized_cov(&self, lo: usize, hi: usize) -> impl Iterator<Item = f64> + '_ {
        let scale = 2.0 * self.calibration.trace_hat;
        (lo..=hi).map(move |t| self.weight(t) * self.cov.per_tau.at(t) / scale)
    }

    fn weight(&self, tau: usize) -> f64 {
        let (t, n) = (tau as f64, self.n as f64);
        t * (n - t) / n
    }

    pub fn localize(&self, lambda: f64) -> Result<LocalizationOutcome> {
        let (lo, hi) = self.grid(lambda)?;
        let values = self
            .standardized_mean(lo, hi)
            .zip(self.standardized_cov(lo, hi))
            .map(|(m, v)| dist::fisher_combine_log(log_sf_unchecked(m), log_sf_unchecked(v)))
            .collect();
        let profile = StatCurve::new(lo, values);
        Ok(LocalizationOutcome { tau_hat: profile.argmax(), lambda, grid_lo: lo, grid_hi: hi, profile })
    }

    /// `-2 ln(1 - Phi(.))` of the standardized mean curve.
    pub fn mean_profile(&self, lambda: f64) -> Result<StatCurve> {
        let (lo, hi) = self.grid(lambda)?;
        Ok(StatCurve::new(lo, self.standardized_mean(lo, hi).map(|z| -2.0 * log_sf_unchecked(z)).collect()))
    }

    pub fn cov_profile(&self, lambda: f64) -> Result<StatCurve> {
        let (lo, hi) = self.grid(lambda)?;
        Ok(StatCurve::new(lo, self.standardized_cov(lo, hi).map(|z| -2.0 * log_sf_unchecked(z)).collect()))
    }

    /// Outcomes for FISHER, BONFERRONI, MEAN_ONLY and COV_ONLY, in that order.
    pub fn baselines(&self, alpha: f64, lambda: f64) -> Result<Vec<BaselineOutcome>> {
        let test = self.detect(alpha)?;
        let fisher_tau = self.localize(lambda)?.tau_hat;
        let mean_tau = self.mean_profile(lambda)?.argmax();
        let cov_tau = self.cov_profile(lambda)?.argmax();
        let min_p_tau = select_min_p(test.log_p_mean, test.log_p_cov, mean_tau, cov_tau);
        let half_alpha = (alpha / 2.0).ln();
        Ok(vec![
            BaselineOutcome { method: Method::Fisher, reject: test.reject, tau_hat: Some(fisher_tau) },
            BaselineOutcome {
                method: Method::Bonferroni,
                reject: test.log_p_mean.min(test.log_p_cov) <= half_alpha,
                tau_hat: Some(min_p_tau),
            },
            BaselineOutcome {
                method: Method::MeanOnly,
                reject: test.log_p_mean <= alpha.ln(),
                tau_hat: Some(mean_tau),
            },
            BaselineOutcome { method: Method::CovOnly, reject: test.log_p_cov <= alpha.ln(), tau_hat: Some(cov_tau) },
        ])
    }
}

/// Min-p rule: the mean estimate wins ties.
pub fn select_min_p(log_p_mean: f64, log_p_cov: f64, mean_tau: usize, cov_tau: usize) -> usize {
    if log_p_mean <= log_p_cov {
        mean_tau
    } else {
        cov_tau
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

/// Joint test for a change in mean and/or covariance at level `alpha`.
pub fn detect(data: &Dataset, alpha: f64) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    Analysis::new(data)?.detect(alpha)
}

/// Changepoint estimate maximizing the combined per-split profile.
pub fn localize(data: &Dataset, lambda: f64) -> Result<LocalizationOutcome> {
    let analysis = Analysis::new(data)?;
    analysis.grid(lambda)?;
    analysis.localize(lambda)
}

pub fn baselines(data: &Dataset, alpha: f64, lambda: f64) -> Result<Vec<BaselineOutcome>> {
    check_alpha(alpha)?;
    Analysis::new(data)?.baselines(alpha, lambda)
}
