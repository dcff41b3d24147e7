//! Naive reference implementations: direct sums over index tuples, written
//! from the defining formulas with no shared code from the fast paths.
//! Hard caps on `n` keep them out of experiment-scale runs.

use crate::error::{Error, Result};
use crate::model::Dataset;

pub const MEAN_ORACLE_MAX_N: usize = 24;
pub const COV_ORACLE_MAX_N: usize = 16;

fn check(data: &Dataset, tau: usize, margin: usize, max_n: usize) -> Result<()> {
    let n = data.n();
    if n > max_n {
        return Err(Error::BadParam(format!("oracle capped at n = {max_n}, got {n}")));
    }
    if tau < margin || tau + margin > n {
        return Err(Error::TauOutOfRange { tau, lo: margin, hi: n.saturating_sub(margin) });
    }
    Ok(())
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn inner(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        s += a[k] * b[k];
    }
    s
}

/// `sum (x_i1 - x_j1).(x_i2 - x_j2)` over `i1 != i2 <= tau < j1 != j2`,
/// divided by `tau (tau-1) (n-tau) (n-tau-1)`.
pub fn naive_mean_stat(data: &Dataset, tau: usize) -> Result<f64> {
    check(data, tau, 2, MEAN_ORACLE_MAX_N)?;
    let n = data.n();
    let x = |i: usize| data.row(i - 1);
    let mut s = 0.0;
    for i1 in 1..=tau {
        for i2 in 1..=tau {
            if i1 == i2 {
                continue;
            }
            for j1 in tau + 1..=n {
                for j2 in tau + 1..=n {
                    if j1 == j2 {
                        continue;
                    }
                    s += inner(&diff(x(i1), x(j1)), &diff(x(i2), x(j2)));
                }
            }
        }
    }
    let (t, m) = (tau as f64, (n - tau) as f64);
    Ok(s / (t * (t - 1.0) * m * (m - 1.0)))
}

fn kernel(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> f64 {
    let v = inner(&diff(a, b), &diff(c, d));
    v * v / 4.0
}

fn falling(m: usize, k: usize) -> f64 {
    (0..k).map(|j| (m - j) as f64).product()
}

/// Average of `H` over distinct 4-tuples in `[lo, hi]` (1-based, inclusive).
fn within(data: &Dataset, lo: usize, hi: usize) -> f64 {
    let x = |i: usize| data.row(i - 1);
    let mut s = 0.0;
    for i in lo..=hi {
        for j in lo..=hi {
            if j == i {
                continue;
            }
            for k in lo..=hi {
                if k == i || k == j {
                    continue;
                }
                for l in lo..=hi {
                    if l != i && l != j && l != k {
                        s += kernel(x(i), x(j), x(k), x(l));
                    }
                }
            }
        }
    }
    s / falling(hi + 1 - lo, 4)
}

/// Within-group `H` averages over `P^4_tau` and `P^4_{n-tau}` minus twice
/// the cross average over `(i != j <= tau, tau < k != l)`.
pub fn naive_cov_stat(data: &Dataset, tau: usize) -> Result<f64> {
    check(data, tau, 4, COV_ORACLE_MAX_N)?;
    let n = data.n();
    let x = |i: usize| data.row(i - 1);
    let mut cross = 0.0;
    for i in 1..=tau {
        for j in 1..=tau {
            if i == j {
                continue;
            }
            for k in tau + 1..=n {
                for l in tau + 1..=n {
                    if k != l {
                        cross += kernel(x(i), x(j), x(k), x(l));
                    }
                }
            }
        }
    }
    cross /= falling(tau, 2) * falling(n - tau, 2);
    Ok(within(data, 1, tau) + within(data, tau + 1, n) - 2.0 * cross)
}

/// `sum_ij sigma_ij^2` for a symmetric matrix given as rows.
pub fn naive_trace_sq(sigma: &[Vec<f64>]) -> Result<f64> {
    let p = sigma.len();
    let mut s = 0.0;
    for (i, row) in sigma.iter().enumerate() {
        if row.len() != p {
            return Err(Error::NotSymmetric);
        }
        for (j, &v) in row.iter().enumerate() {
            if v != sigma[j][i] {
                return Err(Error::NotSymmetric);
            }
            s += v * v;
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_d(v: &[f64]) -> Dataset {
        Dataset::from_rows(&v.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn constant_data() {
        let d = Dataset::from_rows(&vec![vec![1.5, -2.0]; 10]).unwrap();
        assert_eq!(naive_mean_stat(&d, 5).unwrap(), 0.0);
        assert_eq!(naive_cov_stat(&d, 5).unwrap(), 0.0);
    }

    #[test]
    fn mean_step_by_hand() {
        // Groups (0,0) and (1,1) padded with equal values: every term is
        // (0 - 1)(0 - 1) = 1, so the normalized sum is exactly 1.
        let d = one_d(&[0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(naive_mean_stat(&d, 2).unwrap(), 1.0);
    }

    #[test]
    fn alternating_data_cov() {
        // Groups {0,1,0,1} | {0,1,0,1}. A distinct 4-tuple inside one group
        // has x_i != x_j with probability 2/3, and then x_k != x_l surely:
        // within average 2/3 * 1/4 = 1/6. Across groups both pairs differ
        // with probability 2/3 independently: 4/9 * 1/4 = 1/9.
        let d = one_d(&[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        let v = naive_cov_stat(&d, 4).unwrap();
        assert!((v - 1.0 / 9.0).abs() < 1e-15, "{v}");
    }

    #[test]
    fn tau_range_enforced() {
        let d = one_d(&[0.0; 10]);
        assert!(matches!(naive_mean_stat(&d, 1), Err(Error::TauOutOfRange { .. })));
        assert!(matches!(naive_mean_stat(&d, 9), Err(Error::TauOutOfRange { .. })));
        assert!(matches!(naive_cov_stat(&d, 3), Err(Error::TauOutOfRange { .. })));
        assert!(matches!(naive_cov_stat(&d, 7), Err(Error::TauOutOfRange { .. })));
        let big = one_d(&[0.0; 17]);
        assert!(matches!(naive_cov_stat(&big, 8), Err(Error::BadParam(_))));
    }

    #[test]
    fn trace_sq_cases() {
        let eye = |p: usize, s: f64| -> Vec<Vec<f64>> {
            (0..p).map(|i| (0..p).map(|j| if i == j { s } else { 0.0 }).collect()).collect()
        };
        assert_eq!(naive_trace_sq(&eye(5, 1.0)).unwrap(), 5.0);
        assert_eq!(naive_trace_sq(&eye(3, 2.0)).unwrap(), 12.0);
        let ar: Vec<Vec<f64>> =
            (0..4).map(|i: i32| (0..4).map(|j| 0.3f64.powi((i - j).abs())).collect()).collect();
        // 4 + 2 (3 * 0.09 + 2 * 0.0081 + 0.000729)
        let want = 4.0 + 2.0 * (3.0 * 0.09 + 2.0 * 0.0081 + 0.000729);
        assert!((naive_trace_sq(&ar).unwrap() - want).abs() < 1e-12);
        let mut bad = eye(3, 1.0);
        bad[0][1] = 0.5;
        assert_eq!(naive_trace_sq(&bad), Err(Error::NotSymmetric));
    }
}
