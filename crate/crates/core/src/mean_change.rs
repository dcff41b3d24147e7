//! Mean-shift U-statistic.
//!
//! For a split after observation `tau`,
//!
//! ```text
//! M(tau) = W1 / (tau (tau-1)) + W2 / ((n-tau)(n-tau-1)) - 2 X / (tau (n-tau))
//! ```
//!
//! where `W1`, `W2` are the off-diagonal inner-product sums within each
//! group and `X` the cross-group sum. All three follow from running sums of
//! the observations and of their squared norms, giving `O(np)` for the
//! whole curve.

use crate::error::{Error, Result};
use crate::model::{center_columns, dot, Dataset, StatCurve};

/// Per-split mean statistics over `tau = 2..=n-2` and their weighted aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanStatResult {
    pub per_tau: StatCurve,
    pub aggregate: f64,
}

pub fn mean_stat_curve(data: &Dataset) -> MeanStatResult {
    curve_from_rows(data.n(), data.p(), data.values().to_vec())
}

/// [`mean_stat_curve`] on a raw row-major buffer, valid from `n = 4`.
///
/// Unlike [`Dataset`] this does not reject small samples or non-finite
/// entries; it exists for checking identities at sizes below the dataset
/// minimum.
pub fn mean_stat_curve_raw(values: &[f64], p: usize) -> Result<MeanStatResult> {
    if p == 0 || !values.len().is_multiple_of(p) {
        return Err(Error::BadParam("buffer is not a whole number of rows".into()));
    }
    let n = values.len() / p;
    if n < 4 {
        return Err(Error::NTooSmall { n, min: 4 });
    }
    Ok(curve_from_rows(n, p, values.to_vec()))
}

fn curve_from_rows(n: usize, p: usize, mut x: Vec<f64>) -> MeanStatResult {
    center_columns(&mut x, p);
    let rows = || x.chunks_exact(p);

    let mut total = vec![0.0; p];
    let mut total_sq = 0.0;
    for r in rows() {
        total.iter_mut().zip(r).for_each(|(s, v)| *s += v);
        total_sq += dot(r, r);
    }

    let nf = n as f64;
    let mut prefix = vec![0.0; p];
    let mut suffix = vec![0.0; p];
    let mut prefix_sq = 0.0;
    let mut values = Vec::with_capacity(n - 3);
    for (i, r) in rows().enumerate().take(n - 2) {
        prefix.iter_mut().zip(r).for_each(|(s, v)| *s += v);
        prefix_sq += dot(r, r);
        let tau = i + 1;
        if tau < 2 {
            continue;
        }
        suffix.iter_mut().zip(prefix.iter().zip(&total)).for_each(|(s, (a, t))| *s = t - a);
        let t = tau as f64;
        let within1 = dot(&prefix, &prefix) - prefix_sq;
        let within2 = dot(&suffix, &suffix) - (total_sq - prefix_sq);
        let cross = dot(&prefix, &suffix);
        values.push(within1 / (t * (t - 1.0)) + within2 / ((nf - t) * (nf - t - 1.0)) - 2.0 * cross / (t * (nf - t)));
    }
    let per_tau = StatCurve::new(2, values);
    let aggregate = per_tau.weighted_sum(n);
    MeanStatResult { per_tau, aggregate }
}

/// Coefficients `a[i][k]` (1-based, `i < k`) such that the aggregated mean
/// statistic equals `sum_{i<k} a[i][k] x_i . x_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    n: usize,
    a: Vec<f64>,
}

impl CoefficientTable {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `a[i][k]` for `1 <= i < k <= n`; zero otherwise.
    pub fn get(&self, i: usize, k: usize) -> f64 {
        if i == 0 || i >= k || k > self.n {
            return 0.0;
        }
        self.a[(i - 1) * self.n + (k - 1)]
    }

    /// Symmetric extension with zero diagonal.
    pub fn symmetric(&self, i: usize, k: usize) -> f64 {
        if i < k {
            self.get(i, k)
        } else {
            self.get(k, i)
        }
    }

    /// `sum_{i<k} a[i][k] x_i . x_k` for a row-major buffer of `n` rows.
    pub fn apply(&self, values: &[f64], p: usize) -> Result<f64> {
        if p == 0 || values.len() != self.n * p {
            return Err(Error::BadParam(format!(
                "coefficient table for n = {} applied to a buffer of {} values",
                self.n,
                values.len()
            )));
        }
        let row = |i: usize| &values[(i - 1) * p..i * p];
        let mut s = 0.0;
        for k in 2..=self.n {
            for i in 1..k {
                s += self.get(i, k) * dot(row(i), row(k));
            }
        }
        Ok(s)
    }
}

pub fn mean_coefficients(n: usize) -> Result<CoefficientTable> {
    if n < 4 {
        return Err(Error::NTooSmall { n, min: 4 });
    }
    let nf = n as f64;
    let shrink = 1.0 - 1.0 / nf;
    // left[i] = sum_{tau=2}^{i-1} 2 / (n - tau - 1)
    let mut left = vec![0.0; n + 1];
    for i in 3..=n {
        let tau = (i - 1) as f64;
        left[i] = left[i - 1] + if i - 1 <= n - 2 { 2.0 / (nf - tau - 1.0) } else { 0.0 };
    }
    // right[k] = sum_{tau=k}^{n-2} 2 / (tau - 1)
    let mut right = vec![0.0; n + 2];
    for k in (2..=n).rev() {
        right[k] = right[k + 1] + if k <= n - 2 { 2.0 / (k as f64 - 1.0) } else { 0.0 };
    }
    let constant = 6.0 / nf - 2.0;
    let mut a = vec![0.0; n * n];
    for i in 1..n {
        for k in i + 1..=n {
            a[(i - 1) * n + (k - 1)] = (left[i] + right[k]) * shrink + constant;
        }
    }
    Ok(CoefficientTable { n, a })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(rows: &[Vec<f64>]) -> Dataset {
        Dataset::from_rows(rows).unwrap()
    }

    fn pseudo_random(n: usize, p: usize, salt: f64) -> Dataset {
        let rows: Vec<Vec<f64>> =
            (0..n).map(|i| (0..p).map(|l| ((i * 31 + l * 17) as f64 * 0.7317 + salt).sin() * 2.0).collect()).collect();
        data(&rows)
    }

    #[test]
    fn constant_rows_give_zero() {
        let r = mean_stat_curve(&data(&vec![vec![3.0, -1.0]; 10]));
        assert!(r.per_tau.values.iter().all(|v| v.abs() < 1e-12));
        assert!(r.aggregate.abs() < 1e-12);
    }

    #[test]
    fn two_level_step() {
        // 0,0,0,0,1,1,1,1: at tau = 4 both groups are constant, so
        // within-group terms vanish and M = |0 - 1|^2 = 1.
        let rows: Vec<Vec<f64>> = [0., 0., 0., 0., 1., 1., 1., 1.].iter().map(|&v| vec![v]).collect();
        let r = mean_stat_curve(&data(&rows));
        assert!((r.per_tau.at(4) - 1.0).abs() < 1e-14);
        assert_eq!((r.per_tau.tau_min, r.per_tau.tau_max), (2, 6));
    }

    #[test]
    fn aggregate_is_weighted_sum() {
        let d = pseudo_random(15, 4, 0.3);
        let r = mean_stat_curve(&d);
        let n = 15.0;
        let want: f64 = r.per_tau.iter().map(|(t, v)| t as f64 * (n - t as f64) / n * v).sum();
        assert!((r.aggregate - want).abs() <= 1e-10 * want.abs().max(1e-12));
    }

    #[test]
    fn reversal_maps_tau_to_n_minus_tau() {
        let d = pseudo_random(13, 3, 1.1);
        let a = mean_stat_curve(&d);
        let b = mean_stat_curve(&d.reversed());
        for (t, v) in a.per_tau.iter() {
            let w = b.per_tau.at(13 - t);
            assert!((v - w).abs() <= 1e-10 * v.abs().max(1e-12), "tau {t}");
        }
    }

    #[test]
    fn hand_enumerated_four_points() {
        // x = (0,0,1,1), tau = 2: the only tuples are i in {1,2}, j in {3,4}
        // with i1 != i2, j1 != j2, each contributing (0-1)(0-1) = 1; four
        // tuples over 2 * 1 * 2 * 1.
        let r = mean_stat_curve_raw(&[0.0, 0.0, 1.0, 1.0], 1).unwrap();
        assert_eq!(r.per_tau.len(), 1);
        assert!((r.per_tau.at(2) - 1.0).abs() < 1e-15);
        assert!(matches!(mean_stat_curve_raw(&[0.0; 3], 1), Err(Error::NTooSmall { .. })));
    }

    #[test]
    fn empty_sum_convention() {
        let c = mean_coefficients(4).unwrap();
        assert!((c.get(1, 4) - (-0.5)).abs() < 1e-15);
        assert!(matches!(mean_coefficients(3), Err(Error::NTooSmall { .. })));
    }

    #[test]
    fn coefficient_rows_sum_to_zero() {
        let n = 10;
        let c = mean_coefficients(n).unwrap();
        for i in 1..=n {
            let s: f64 = (1..=n).filter(|&j| j != i).map(|j| c.symmetric(i, j)).sum();
            assert!(s.abs() <= 1e-9, "row {i}: {s}");
        }
    }

    #[test]
    fn coefficients_reproduce_aggregate() {
        let d = pseudo_random(9, 3, 2.0);
        let via_table = mean_coefficients(9).unwrap().apply(d.values(), 3).unwrap();
        let direct = mean_stat_curve(&d).aggregate;
        assert!((via_table - direct).abs() <= 1e-9 * direct.abs());
        // n = 6 is below the dataset minimum; use the raw entry point.
        let raw: Vec<f64> = (0..12).map(|k| (k as f64 * 1.9).cos()).collect();
        let via_table = mean_coefficients(6).unwrap().apply(&raw, 2).unwrap();
        let direct = mean_stat_curve_raw(&raw, 2).unwrap().aggregate;
        assert!((via_table - direct).abs() <= 1e-9 * direct.abs());
    }
}
