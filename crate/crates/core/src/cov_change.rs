//! Covariance-shift U-statistic built on the Frobenius kernel
//! `H(a, b, c, d) = ((a - b) . (c - d))^2 / 4`.
//!
//! `V(tau) = A(tau) + B(tau) - 2 C(tau)`: `A` and `B` are the within-group
//! estimators of `tr(Sigma^2)` and `C` the cross-group estimator of
//! `tr(Sigma_1 Sigma_2)`. Each expands into sums of Gram entries `g_ij` and
//! their squares over distinct index tuples. Given the column sums
//! `r_j(tau) = sum_{i <= tau} g_ij` and `s_j(tau) = sum_{i <= tau} g_ij^2`,
//! every tuple sum for one split is an `O(n)` pass, and both columns sums
//! update in `O(n)` when `tau` advances. Suffix quantities are totals minus
//! prefixes.

use crate::error::{Error, Result};
use crate::model::{Dataset, GramMatrix, StatCurve, MIN_OBSERVATIONS};

/// Per-split covariance statistics over `tau = 4..=n-4` and their weighted aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct CovStatResult {
    pub per_tau: StatCurve,
    pub aggregate: f64,
}

/// Distinct-index sums over one group.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct WithinSums {
    /// sum over i != j of g_ij
    pub pairs: f64,
    /// sum over i != j of g_ij^2
    pub pairs_sq: f64,
    /// sum over distinct i, j, k of g_ij g_jk
    pub paths: f64,
}

impl WithinSums {
    /// sum over distinct i, j, k, l of g_ij g_kl
    pub fn quads(&self) -> f64 {
        self.pairs * self.pairs - 2.0 * self.pairs_sq - 4.0 * self.paths
    }

    /// Unbiased estimate of tr(Sigma^2) from a group of `m` observations.
    pub fn estimate(&self, m: usize) -> f64 {
        let m = m as f64;
        let p2 = m * (m - 1.0);
        let p3 = p2 * (m - 2.0);
        let p4 = p3 * (m - 3.0);
        self.pairs_sq / p2 - 2.0 * self.paths / p3 + self.quads() / p4
    }
}

/// Cross-group sums for groups `G1` (size `m1`) and `G2` (size `m2`).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct CrossSums {
    /// sum over i in G1, j in G2 of g_ij^2
    pub pairs_sq: f64,
    /// sum over i != k in G1, j in G2 of g_ij g_jk
    pub paths_via_second: f64,
    /// sum over i != k in G2, j in G1 of g_ij g_jk
    pub paths_via_first: f64,
    /// sum over i != k in G1, j != l in G2 of g_ij g_kl
    pub quads: f64,
}

impl CrossSums {
    /// Unbiased estimate of tr(Sigma_1 Sigma_2).
    pub fn estimate(&self, m1: usize, m2: usize) -> f64 {
        let (a, b) = (m1 as f64, m2 as f64);
        let (a2, b2) = (a * (a - 1.0), b * (b - 1.0));
        self.pairs_sq / (a * b) - self.paths_via_second / (a2 * b) - self.paths_via_first / (a * b2)
            + self.quads / (a2 * b2)
    }
}

/// Sweep state: Gram entries plus prefix column sums for the current split.
struct Sweep {
    n: usize,
    g: Vec<f64>,
    g_sq: Vec<f64>,
    diag: Vec<f64>,
    total_row: Vec<f64>,
    total_row_sq: Vec<f64>,
    prefix_row: Vec<f64>,
    prefix_row_sq: Vec<f64>,
    tau: usize,
}

impl Sweep {
    fn new(gram: &GramMatrix) -> Self {
        let n = gram.n();
        let g = double_centered(gram);
        let g_sq: Vec<f64> = g.iter().map(|v| v * v).collect();
        let diag = (0..n).map(|j| g[j * n + j]).collect();
        let total_row = g.chunks_exact(n).map(|r| r.iter().sum()).collect();
        let total_row_sq = g_sq.chunks_exact(n).map(|r| r.iter().sum()).collect();
        Self {
            n,
            g,
            g_sq,
            diag,
            total_row,
            total_row_sq,
            prefix_row: vec![0.0; n],
            prefix_row_sq: vec![0.0; n],
            tau: 0,
        }
    }

    /// Moves observation `tau` (0-based) into the first group.
    fn advance(&mut self) {
        let i = self.tau;
        let n = self.n;
        let row = &self.g[i * n..(i + 1) * n];
        let row_sq = &self.g_sq[i * n..(i + 1) * n];
        self.prefix_row.iter_mut().zip(row).for_each(|(s, v)| *s += v);
        self.prefix_row_sq.iter_mut().zip(row_sq).for_each(|(s, v)| *s += v);
        self.tau += 1;
    }

    fn sums(&self) -> (WithinSums, WithinSums, CrossSums) {
        let mut first = WithinSums::default();
        let mut second = WithinSums::default();
        let mut cross = CrossSums::default();
        let mut first_to_second = 0.0;
        let mut suffix_sq_over_first = 0.0;
        for j in 0..self.n {
            let d = self.diag[j];
            let d_sq = d * d;
            let r1 = self.prefix_row[j];
            let s1 = self.prefix_row_sq[j];
            let r2 = self.total_row[j] - r1;
            let s2 = self.total_row_sq[j] - s1;
            if j < self.tau {
                let off = r1 - d;
                first.pairs += off;
                first.pairs_sq += s1 - d_sq;
                first.paths += off * off - s1 + d_sq;
                cross.paths_via_first += r2 * r2 - s2;
                suffix_sq_over_first += r2 * r2;
            } else {
                let off = r2 - d;
                second.pairs += off;
                second.pairs_sq += s2 - d_sq;
                second.paths += off * off - s2 + d_sq;
                cross.pairs_sq += s1;
                cross.paths_via_second += r1 * r1 - s1;
                first_to_second += r1;
            }
        }
        cross.quads = first_to_second * first_to_second - suffix_sq_over_first - cross.paths_via_second;
        (first, second, cross)
    }

    fn value(&self) -> f64 {
        let (first, second, cross) = self.sums();
        let m1 = self.tau;
        let m2 = self.n - self.tau;
        first.estimate(m1) + second.estimate(m2) - 2.0 * cross.estimate(m1, m2)
    }
}

/// Gram matrix of the column-centered data, `g_ij - m_i - m_j + m`.
fn double_centered(gram: &GramMatrix) -> Vec<f64> {
    let n = gram.n();
    let nf = n as f64;
    let row_mean: Vec<f64> = (0..n).map(|i| gram.row(i).iter().sum::<f64>() / nf).collect();
    let grand = row_mean.iter().sum::<f64>() / nf;
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = gram.get(i, j) - row_mean[i] - row_mean[j] + grand;
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
    }
    g
}

pub fn cov_stat_curve(data: &Dataset, gram: &GramMatrix) -> Result<CovStatResult> {
    let n = data.n();
    if n < MIN_OBSERVATIONS {
        return Err(Error::NTooSmall { n, min: MIN_OBSERVATIONS });
    }
    if gram.n() != n {
        return Err(Error::GramMismatch { got: gram.n(), expected: n });
    }
    let mut sweep = Sweep::new(gram);
    let mut values = Vec::with_capacity(n - 7);
    while sweep.tau < n - 4 {
        sweep.advance();
        if sweep.tau >= 4 {
            values.push(sweep.value());
        }
    }
    let per_tau = StatCurve::new(4, values);
    let aggregate = per_tau.weighted_sum(n);
    Ok(CovStatResult { per_tau, aggregate })
}

/// The six groups of tuple sums at one split, exposed for cross-checking
/// against direct enumeration.
#[doc(hidden)]
pub fn split_sums(gram: &GramMatrix, tau: usize) -> [f64; 10] {
    let mut sweep = Sweep::new(gram);
    while sweep.tau < tau {
        sweep.advance();
    }
    let (a, b, c) = sweep.sums();
    [
        a.pairs_sq,
        a.paths,
        a.quads(),
        b.pairs_sq,
        b.paths,
        b.quads(),
        c.pairs_sq,
        c.paths_via_second,
        c.paths_via_first,
        c.quads,
    ]
}
