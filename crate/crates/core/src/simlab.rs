//! Data generation for the AR(1) and block-diagonal simulation designs, and
//! a Monte Carlo harness reporting size, power and localization accuracy.
//!
//! Every replication draws from its own generator seeded by mixing the base
//! seed with the replication index, so results do not depend on how many
//! threads run them.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inference::{Analysis, BaselineOutcome, Method};
use crate::model::{dot, CovScenario, Dataset, ErrorDist, SimulationModel, SqrtMethod, TestOutcome};

/// Correlation parameter of the pre-change covariance in both scenarios.
pub const PRE_CHANGE_CORRELATION: f64 = 0.3;
/// Correlation parameter of the post-change covariance in both scenarios.
pub const POST_CHANGE_CORRELATION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CovKind {
    /// `rho^|i-j|`
    Ar1 { rho: f64 },
    /// Unit diagonal, `r` between distinct coordinates of the same block of 5.
    Block5 { r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovSpec {
    pub kind: CovKind,
    pub scale: f64,
}

impl CovSpec {
    pub fn for_scenario(scenario: CovScenario, correlation: f64, scale: f64) -> Self {
        let kind = match scenario {
            CovScenario::Ar1 => CovKind::Ar1 { rho: correlation },
            CovScenario::Block5 => CovKind::Block5 { r: correlation },
        };
        Self { kind, scale }
    }
}

pub fn build_cov(spec: &CovSpec, p: usize) -> Result<DMatrix<f64>> {
    if p == 0 {
        return Err(Error::BadParam("dimension must be positive".into()));
    }
    if !(spec.scale > 0.0 && spec.scale.is_finite()) {
        return Err(Error::BadParam(format!("covariance scale {} must be positive", spec.scale)));
    }
    let m = match spec.kind {
        CovKind::Ar1 { rho } => {
            check_correlation(rho)?;
            DMatrix::from_fn(p, p, |i, j| rho.powi(i.abs_diff(j) as i32))
        }
        CovKind::Block5 { r } => {
            check_correlation(r)?;
            let covered = 5 * (p / 5);
            DMatrix::from_fn(p, p, |i, j| {
                if i == j {
                    1.0
                } else if i < covered && j < covered && i / 5 == j / 5 {
                    r
                } else {
                    0.0
                }
            })
        }
    };
    Ok(m * spec.scale)
}

fn check_correlation(c: f64) -> Result<()> {
    if c > -1.0 && c < 1.0 {
        Ok(())
    } else {
        Err(Error::BadParam(format!("correlation {c} outside (-1, 1)")))
    }
}

fn check_symmetric(sigma: &DMatrix<f64>) -> Result<()> {
    if !sigma.is_square() {
        return Err(Error::NotSymmetric);
    }
    let n = sigma.nrows();
    for i in 0..n {
        for j in 0..i {
            if sigma[(i, j)] != sigma[(j, i)] {
                return Err(Error::NotSymmetric);
            }
        }
    }
    Ok(())
}

/// Symmetric square root `V diag(sqrt(lambda)) V^T`.
pub fn cov_sqrt(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(sigma)?;
    let eig = sigma.clone().symmetric_eigen();
    let tol = 1e-10 * sigma.norm();
    let mut roots = eig.eigenvalues.clone();
    for v in roots.iter_mut() {
        if *v < -tol {
            return Err(Error::NotPsd(*v));
        }
        *v = v.max(0.0).sqrt();
    }
    let q = &eig.eigenvectors;
    let r = q * DMatrix::from_diagonal(&roots) * q.transpose();
    Ok((&r + r.transpose()) * 0.5)
}

fn cholesky_factor(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(sigma)?;
    sigma
        .clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::NotPsd(sigma.clone().symmetric_eigen().eigenvalues.min()))
}

pub fn cov_factor(sigma: &DMatrix<f64>, method: SqrtMethod) -> Result<DMatrix<f64>> {
    match method {
        SqrtMethod::Spectral => cov_sqrt(sigma),
        SqrtMethod::Cholesky => cholesky_factor(sigma),
    }
}

/// A ready-to-sample two-segment design with precomputed covariance factors.
#[derive(Debug, Clone)]
pub struct Design {
    n: usize,
    p: usize,
    tau_star: Option<usize>,
    pre_factor: Vec<f64>,
    post_factor: Vec<f64>,
    pre_mean: Vec<f64>,
    post_mean: Vec<f64>,
    error_dist: ErrorDist,
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

impl Design {
    /// General design from explicit segment means and covariances.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        tau_star: Option<usize>,
        pre_mean: Vec<f64>,
        pre_cov: &DMatrix<f64>,
        post_mean: Vec<f64>,
        post_cov: &DMatrix<f64>,
        error_dist: ErrorDist,
        sqrt_method: SqrtMethod,
    ) -> Result<Self> {
        let p = pre_mean.len();
        if p == 0 || post_mean.len() != p || pre_cov.nrows() != p || post_cov.nrows() != p {
            return Err(Error::BadParam("mean and covariance dimensions disagree".into()));
        }
        if let Some(t) = tau_star {
            if t == 0 || t >= n {
                return Err(Error::BadParam(format!("tau_star = {t} outside [1, {}]", n.saturating_sub(1))));
            }
        }
        Ok(Self {
            n,
            p,
            tau_star,
            pre_factor: row_major(&cov_factor(pre_cov, sqrt_method)?),
            post_factor: row_major(&cov_factor(post_cov, sqrt_method)?),
            pre_mean,
            post_mean,
            error_dist,
        })
    }

    pub fn from_model(model: &SimulationModel) -> Result<Self> {
        model.validate()?;
        let p = model.p;
        let pre = build_cov(&CovSpec::for_scenario(model.cov_scenario, PRE_CHANGE_CORRELATION, 1.0), p)?;
        let post = build_cov(&CovSpec::for_scenario(model.cov_scenario, POST_CHANGE_CORRELATION, model.delta2), p)?;
        let shift = model.delta1 / (p as f64).sqrt();
        Self::new(
            model.n,
            model.tau_star,
            vec![0.0; p],
            &pre,
            vec![shift; p],
            &post,
            model.error_dist,
            model.sqrt_method,
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau_star(&self) -> Option<usize> {
        self.tau_star
    }

    pub fn sample(&self, seed: u64) -> Result<Dataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = self.p;
        let change = self.tau_star.unwrap_or(self.n);
        let t9 = StudentT::new(9.0).expect("valid degrees of freedom");
        let t9_scale = (7.0f64 / 9.0).sqrt();
        let mut e = vec![0.0; p];
        let mut values = Vec::with_capacity(self.n * p);
        for i in 0..self.n {
            for v in e.iter_mut() {
                *v = match self.error_dist {
                    ErrorDist::Normal => rng.sample(StandardNormal),
                    ErrorDist::T9Standardized => t9.sample(&mut rng) * t9_scale,
                };
            }
            let (factor, mean) =
                if i < change { (&self.pre_factor, &self.pre_mean) } else { (&self.post_factor, &self.post_mean) };
            values.extend(factor.chunks_exact(p).zip(mean).map(|(row, m)| m + dot(row, &e)));
        }
        Dataset::from_row_major(self.n, p, values)
    }
}

/// Draws one dataset from `model`, seeded by `model.seed`.
pub fn gen_dataset(model: &SimulationModel) -> Result<Dataset> {
    Design::from_model(model)?.sample(model.seed)
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replication `index` derived from the experiment seed.
pub fn replication_seed(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed) ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Runs `f(index, seed)` for every replication on `parallelism` threads and
/// returns the results in replication order.
pub fn replicate<T, F>(seed: u64, reps: usize, parallelism: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, u64) -> Result<T> + Sync,
{
    if reps == 0 {
        return Err(Error::BadParam("reps must be at least 1".into()));
    }
    let run = |i: usize| f(i, replication_seed(seed, i as u64));
    if parallelism <= 1 {
        return (0..reps).map(run).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::BadParam(format!("thread pool: {e}")))?;
    pool.install(|| (0..reps).into_par_iter().map(run).collect())
}

/// Everything recorded for one replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationRecord {
    pub index: usize,
    pub seed: u64,
    pub outcome: TestOutcome,
    pub methods: Vec<BaselineOutcome>,
}

impl ReplicationRecord {
    pub fn method(&self, method: Method) -> &BaselineOutcome {
        self.methods.iter().find(|b| b.method == method).expect("all methods recorded")
    }
}

pub fn run_replications(
    model: &SimulationModel,
    reps: usize,
    alpha: f64,
    lambda: f64,
    parallelism: usize,
) -> Result<Vec<ReplicationRecord>> {
    let design = Design::from_model(model)?;
    replicate(model.seed, reps, parallelism, |index, seed| {
        let data = design.sample(seed)?;
        let analysis = Analysis::new(&data)?;
        Ok(ReplicationRecord {
            index,
            seed,
            outcome: analysis.detect(alpha)?,
            methods: analysis.baselines(alpha, lambda)?,
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodReport {
    pub method: Method,
    pub rejection_rate: f64,
    pub mc_stderr: f64,
    pub mean_abs_error: Option<f64>,
}

/// Aggregated Monte Carlo results; the top-level rate is the FISHER test's.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub rep_count: usize,
    pub rejection_rate: f64,
    pub mc_stderr: f64,
    pub mean_abs_error: Option<f64>,
    pub methods: Vec<MethodReport>,
}

impl ExperimentReport {
    pub fn from_records(records: &[ReplicationRecord], tau_star: Option<usize>) -> Self {
        let reps = records.len();
        let methods: Vec<MethodReport> = Method::ALL
            .iter()
            .map(|&method| {
                let rejections = records.iter().filter(|r| r.method(method).reject).count();
                let rate = rejections as f64 / reps as f64;
                let mean_abs_error = tau_star.map(|t| {
                    records.iter().map(|r| r.method(method).tau_hat.map_or(0, |h| h.abs_diff(t)) as f64).sum::<f64>()
                        / reps as f64
                });
                MethodReport { method, rejection_rate: rate, mc_stderr: mc_stderr(rate, reps), mean_abs_error }
            })
            .collect();
        let fisher = &methods[0];
        Self {
            rep_count: reps,
            rejection_rate: fisher.rejection_rate,
            mc_stderr: fisher.mc_stderr,
            mean_abs_error: fisher.mean_abs_error,
            methods,
        }
    }

    pub fn method(&self, method: Method) -> &MethodReport {
        self.methods.iter().find(|m| m.method == method).expect("all methods reported")
    }
}

/// `sqrt(rate (1 - rate) / reps)`
pub fn mc_stderr(rate: f64, reps: usize) -> f64 {
    (rate * (1.0 - rate) / reps as f64).sqrt()
}

pub fn run_experiment(
    model: &SimulationModel,
    reps: usize,
    alpha: f64,
    lambda: f64,
    parallelism: usize,
) -> Result<ExperimentReport> {
    let records = run_replications(model, reps, alpha, lambda, parallelism)?;
    Ok(ExperimentReport::from_records(&records, model.tau_star))
}
