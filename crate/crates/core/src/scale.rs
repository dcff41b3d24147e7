//! Null-variance calibration: a difference-based estimate of `tr(Sigma^2)`
//! plugged into the limiting variances of the aggregated statistics.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{dot, Dataset};

/// Plug-in null variances of the aggregated mean and covariance statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    pub trace_hat: f64,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
}

/// `(2 pi^2 - 18) / 3`
pub fn mean_variance_constant() -> f64 {
    (2.0 * PI * PI - 18.0) / 3.0
}

/// `(4 pi^2 - 36) / 3`
pub fn cov_variance_constant() -> f64 {
    (4.0 * PI * PI - 36.0) / 3.0
}

/// `sum_{i} ((x_i - x_{i+1}) . (x_{i+2} - x_{i+3}))^2 / (4 (n - 3))`.
///
/// Unbiased for `tr(Sigma^2)` when the rows are i.i.d.
pub fn trace_sigma2_hat(data: &Dataset) -> Result<f64> {
    trace_from_rows(data.values(), data.p())
}

fn trace_from_rows(values: &[f64], p: usize) -> Result<f64> {
    let n = values.len() / p;
    if n < 4 {
        return Err(Error::NTooSmall { n, min: 4 });
    }
    let row = |i: usize| &values[i * p..(i + 1) * p];
    let mut left = vec![0.0; p];
    let mut right = vec![0.0; p];
    let mut s = 0.0;
    for i in 0..n - 3 {
        let (a, b, c, d) = (row(i), row(i + 1), row(i + 2), row(i + 3));
        for l in 0..p {
            left[l] = a[l] - b[l];
            right[l] = c[l] - d[l];
        }
        let v = dot(&left, &right);
        s += v * v;
    }
    Ok(s / (4.0 * (n - 3) as f64))
}

pub fn calibrate(trace_hat: f64, n: usize) -> Result<Calibration> {
    if !trace_hat.is_finite() || trace_hat <= 0.0 {
        return Err(Error::DegenerateScale(trace_hat));
    }
    let n2 = (n as f64).powi(2);
    Ok(Calibration {
        trace_hat,
        sigma1_sq: mean_variance_constant() * n2 * trace_hat,
        sigma2_sq: cov_variance_constant() * n2 * trace_hat * trace_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_rows_give_zero_trace() {
        let d = Dataset::from_rows(&vec![vec![1.0, 2.0]; 9]).unwrap();
        assert_eq!(trace_sigma2_hat(&d).unwrap(), 0.0);
    }

    #[test]
    fn single_quadruple_by_hand() {
        let rows = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        assert_eq!(trace_from_rows(&rows, 2).unwrap(), 0.25);
        assert!(matches!(trace_from_rows(&rows[..6], 2), Err(Error::NTooSmall { .. })));
    }

    #[test]
    fn unit_plug_in() {
        let c = calibrate(1.0, 1).unwrap();
        assert!((c.sigma1_sq - 0.579736).abs() < 1e-6);
        assert!((c.sigma2_sq - 1.159472).abs() < 1e-6);
        let c = calibrate(4.0, 10).unwrap();
        assert!((c.sigma2_sq - 16.0 * 100.0 * cov_variance_constant()).abs() < 1e-9);
        assert!((c.sigma1_sq - 4.0 * 100.0 * mean_variance_constant()).abs() < 1e-9);
    }

    #[test]
    fn zero_trace_is_degenerate() {
        assert_eq!(calibrate(0.0, 10), Err(Error::DegenerateScale(0.0)));
        assert!(calibrate(-1.0, 10).is_err());
    }
}
