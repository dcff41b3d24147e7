//! Shared domain types: validated datasets, Gram matrices, statistic curves
//! and the result records returned by the pipelines.

use serde::Serialize;

use crate::error::{Error, Result};

/// Smallest sample size for which every statistic range is nonempty.
pub const MIN_OBSERVATIONS: usize = 8;

/// An `n x p` matrix of finite observations, rows ordered in time.
///
/// Storage is row-major so that one observation is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    p: usize,
    values: Vec<f64>,
}

impl Dataset {
    /// Validates a row-major buffer of `n * p` values.
    pub fn from_row_major(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if p == 0 {
            return Err(Error::EmptyDimension);
        }
        if values.len() != n * p {
            return Err(Error::BadParam(format!("buffer of length {} does not hold {n} x {p} values", values.len())));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { row: pos / p, col: pos % p });
        }
        if n < MIN_OBSERVATIONS {
            return Err(Error::TooFewObservations { n, min: MIN_OBSERVATIONS });
        }
        Ok(Self { n, p, values })
    }

    /// Validates a matrix given as a list of rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let p = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * p);
        for (row, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != p {
                return Err(Error::RaggedMatrix { row, got: r.len(), expected: p });
            }
            values.extend_from_slice(r);
        }
        Self::from_row_major(rows.len(), p, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl DoubleEndedIterator<Item = &[f64]> + ExactSizeIterator + '_ {
        self.values.chunks_exact(self.p)
    }

    /// Returns the dataset with its row order reversed.
    pub fn reversed(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for r in self.rows().rev() {
            values.extend_from_slice(r);
        }
        Self { n: self.n, p: self.p, values }
    }

    /// Applies `f` to every entry, revalidating the result.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_row_major(self.n, self.p, self.values.iter().map(|&v| f(v)).collect())
    }
}

/// Subtracts the column means of a row-major buffer in place.
///
/// Every statistic in this crate is translation invariant, so this only
/// changes rounding behaviour: sums of inner products no longer carry a
/// large common offset.
pub(crate) fn center_columns(values: &mut [f64], p: usize) {
    let n = values.len() / p;
    let mut mean = vec![0.0; p];
    for r in values.chunks_exact(p) {
        mean.iter_mut().zip(r).for_each(|(m, v)| *m += v);
    }
    let inv = 1.0 / n as f64;
    mean.iter_mut().for_each(|m| *m *= inv);
    for r in values.chunks_exact_mut(p) {
        r.iter_mut().zip(&mean).for_each(|(v, m)| *v -= m);
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four independent accumulators let the compiler vectorize.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

/// Symmetric `n x n` matrix of pairwise inner products `g[i][j] = x_i . x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    g: Vec<f64>,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.g[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.g[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.g
    }
}

/// Builds the Gram matrix of the rows of `data` in `O(n^2 p)`.
///
/// The lower triangle is computed and mirrored, so the result is exactly
/// symmetric.
pub fn gram(data: &Dataset) -> GramMatrix {
    let n = data.n();
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        let xi = data.row(i);
        for j in 0..=i {
            let v = dot(xi, data.row(j));
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
    }
    GramMatrix { n, g }
}

/// Values of a statistic indexed by candidate changepoint `tau`
/// over the inclusive range `[tau_min, tau_max]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatCurve {
    pub tau_min: usize,
    pub tau_max: usize,
    pub values: Vec<f64>,
}

impl StatCurve {
    pub(crate) fn new(tau_min: usize, values: Vec<f64>) -> Self {
        debug_assert!(!values.is_empty());
        Self { tau_min, tau_max: tau_min + values.len() - 1, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, tau: usize) -> bool {
        (self.tau_min..=self.tau_max).contains(&tau)
    }

    /// Value at `tau`; panics if `tau` is outside the curve.
    pub fn at(&self, tau: usize) -> f64 {
        assert!(self.contains(tau), "tau {tau} outside [{}, {}]", self.tau_min, self.tau_max);
        self.values[tau - self.tau_min]
    }

    pub fn get(&self, tau: usize) -> Option<f64> {
        self.contains(tau).then(|| self.values[tau - self.tau_min])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().enumerate().map(move |(k, &v)| (self.tau_min + k, v))
    }

    /// Sum of `tau (n - tau) / n * value` over the curve.
    pub fn weighted_sum(&self, n: usize) -> f64 {
        let nf = n as f64;
        self.iter().map(|(t, v)| (t as f64) * (nf - t as f64) / nf * v).sum()
    }

    /// Smallest `tau` attaining the maximum.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = k;
            }
        }
        self.tau_min + best
    }

    /// Every `tau` attaining the maximum exactly.
    pub fn argmax_set(&self) -> Vec<usize> {
        let max = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.iter().filter(|&(_, v)| v == max).map(|(t, _)| t).collect()
    }
}

/// Outcome of the joint mean/covariance changepoint test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestOutcome {
    pub m_n: f64,
    pub v_n: f64,
    pub trace_hat: f64,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    pub z_mean: f64,
    pub z_cov: f64,
    pub p_mean: f64,
    pub p_cov: f64,
    /// Natural log of `p_mean`, exact even where `p_mean` underflows.
    pub log_p_mean: f64,
    pub log_p_cov: f64,
    pub t_n: f64,
    pub critical_value: f64,
    pub p_combined: f64,
    pub alpha: f64,
    pub reject: bool,
}

/// Estimated changepoint together with the combined profile it maximizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationOutcome {
    pub tau_hat: usize,
    pub lambda: f64,
    pub grid_lo: usize,
    pub grid_hi: usize,
    pub profile: StatCurve,
}

/// Covariance family of the simulation designs: AR(1) or 5x5 blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CovScenario {
    Ar1,
    Block5,
}

/// Law of the i.i.d. innovations feeding each observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorDist {
    Normal,
    /// Student t with 9 degrees of freedom scaled to unit variance.
    T9Standardized,
}

/// How `Sigma^{1/2}` is formed when generating `Sigma^{1/2} e`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SqrtMethod {
    /// Symmetric square root from the eigendecomposition.
    #[default]
    Spectral,
    /// Lower Cholesky factor.
    Cholesky,
}

/// Two-segment generating model: observations up to `tau_star` have mean
/// zero and the pre-change covariance; later ones are shifted by
/// `delta1 / sqrt(p)` in every coordinate and use `delta2` times the
/// post-change covariance. `tau_star = None` is the no-change model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationModel {
    pub n: usize,
    pub p: usize,
    pub tau_star: Option<usize>,
    pub delta1: f64,
    pub delta2: f64,
    pub cov_scenario: CovScenario,
    pub error_dist: ErrorDist,
    pub seed: u64,
    pub sqrt_method: SqrtMethod,
}

impl SimulationModel {
    /// No-change model with the given pre-change law.
    pub fn null(n: usize, p: usize, cov_scenario: CovScenario, error_dist: ErrorDist, seed: u64) -> Self {
        Self {
            n,
            p,
            tau_star: None,
            delta1: 0.0,
            delta2: 1.0,
            cov_scenario,
            error_dist,
            seed,
            sqrt_method: SqrtMethod::Spectral,
        }
    }

    pub fn with_change(mut self, tau_star: usize, delta1: f64, delta2: f64) -> Self {
        self.tau_star = Some(tau_star);
        self.delta1 = delta1;
        self.delta2 = delta2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_OBSERVATIONS {
            return Err(Error::TooFewObservations { n: self.n, min: MIN_OBSERVATIONS });
        }
        if self.p == 0 {
            return Err(Error::EmptyDimension);
        }
        if let Some(t) = self.tau_star {
            if t == 0 || t >= self.n {
                return Err(Error::BadParam(format!("tau_star = {t} outside [1, {}]", self.n - 1)));
            }
        }
        if !(self.delta1 >= 0.0 && self.delta1.is_finite()) {
            return Err(Error::BadParam(format!("delta1 = {} must be finite and >= 0", self.delta1)));
        }
        if !(self.delta2 > 0.0 && self.delta2.is_finite()) {
            return Err(Error::BadParam(format!("delta2 = {} must be finite and > 0", self.delta2)));
        }
        Ok(())
    }
}
