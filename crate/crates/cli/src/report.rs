//! Command implementations and report rendering.
//!
//! JSON reports serialize typed structs, so key order follows field order
//! and identical configs give byte-identical output.

use std::path::Path;

use anyhow::{Context, Result};
use cpjoint::simlab::{replication_seed, Design};
use cpjoint::{
    CovScenario, ErrorDist, ExperimentReport, LocalizationOutcome, SimulationModel, SqrtMethod, TestOutcome,
};
use serde::Serialize;

use crate::csv_io;
use crate::Format;

pub const SPEC_VERSION: &str = "1.0.0";

/// Effective configuration of one invocation, echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_path: Option<String>,
    pub alpha: f64,
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<CovScenario>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_star: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub delta1: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub delta2: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_dist: Option<ErrorDist>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sqrt_method: Option<SqrtMethod>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<usize>,
    pub output_format: Format,
    pub emit_profile: bool,
}

impl RunConfig {
    pub fn for_input(
        command: &'static str,
        input: &Path,
        alpha: f64,
        lambda: f64,
        output_format: Format,
        emit_profile: bool,
    ) -> Self {
        Self {
            command,
            input_path: Some(input.display().to_string()),
            alpha,
            lambda,
            scenario: None,
            n: None,
            p: None,
            tau_star: None,
            delta1: Vec::new(),
            delta2: Vec::new(),
            error_dist: None,
            sqrt_method: None,
            reps: None,
            seed: None,
            parallelism: None,
            output_format,
            emit_profile,
        }
    }

    fn input(&self) -> Result<&Path> {
        self.input_path.as_deref().map(Path::new).context("an input path is required")
    }
}

#[derive(Serialize)]
struct DetectReport<'a> {
    spec_version: &'static str,
    config: &'a RunConfig,
    n: usize,
    p: usize,
    #[serde(flatten)]
    outcome: &'a TestOutcome,
}

#[derive(Serialize)]
struct LocalizeReport<'a> {
    spec_version: &'static str,
    config: &'a RunConfig,
    n: usize,
    p: usize,
    tau_hat: usize,
    lambda: f64,
    grid_lo: usize,
    grid_hi: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<&'a [f64]>,
}

#[derive(Serialize)]
struct Setting {
    delta1: f64,
    delta2: f64,
    tau_star: Option<usize>,
    #[serde(flatten)]
    report: ExperimentReport,
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    spec_version: &'static str,
    config: &'a RunConfig,
    results: Vec<Setting>,
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn to_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)?)
}

pub fn cmd_detect(config: &RunConfig) -> Result<String> {
    let data = csv_io::read_dataset(config.input()?)?;
    let outcome = cpjoint::detect(&data, config.alpha)?;
    match config.output_format {
        Format::Json => {
            to_json(&DetectReport { spec_version: SPEC_VERSION, config, n: data.n(), p: data.p(), outcome: &outcome })
        }
        Format::Csv => {
            let o = &outcome;
            let header = [
                "n",
                "p",
                "m_n",
                "v_n",
                "trace_hat",
                "sigma1_sq",
                "sigma2_sq",
                "z_mean",
                "z_cov",
                "p_mean",
                "p_cov",
                "log_p_mean",
                "log_p_cov",
                "t_n",
                "critical_value",
                "p_combined",
                "alpha",
                "reject",
            ];
            let mut row = vec![data.n().to_string(), data.p().to_string()];
            row.extend(
                [
                    o.m_n,
                    o.v_n,
                    o.trace_hat,
                    o.sigma1_sq,
                    o.sigma2_sq,
                    o.z_mean,
                    o.z_cov,
                    o.p_mean,
                    o.p_cov,
                    o.log_p_mean,
                    o.log_p_cov,
                    o.t_n,
                    o.critical_value,
                    o.p_combined,
                    o.alpha,
                ]
                .map(num),
            );
            row.push(o.reject.to_string());
            to_csv(&header, &[row])
        }
    }
}

pub fn cmd_localize(config: &RunConfig) -> Result<String> {
    let data = csv_io::read_dataset(config.input()?)?;
    let LocalizationOutcome { tau_hat, lambda, grid_lo, grid_hi, profile } = cpjoint::localize(&data, config.lambda)?;
    match config.output_format {
        Format::Json => to_json(&LocalizeReport {
            spec_version: SPEC_VERSION,
            config,
            n: data.n(),
            p: data.p(),
            tau_hat,
            lambda,
            grid_lo,
            grid_hi,
            profile: config.emit_profile.then_some(profile.values.as_slice()),
        }),
        Format::Csv => {
            let base = [data.n(), data.p(), tau_hat, grid_lo, grid_hi].map(|v| v.to_string());
            if config.emit_profile {
                let rows: Vec<Vec<String>> = profile
                    .iter()
                    .map(|(tau, v)| {
                        let mut row = base.to_vec();
                        row.push(tau.to_string());
                        row.push(num(v));
                        row
                    })
                    .collect();
                to_csv(&["n", "p", "tau_hat", "grid_lo", "grid_hi", "tau", "profile"], &rows)
            } else {
                to_csv(&["n", "p", "tau_hat", "grid_lo", "grid_hi"], &[base.to_vec()])
            }
        }
    }
}

pub fn cmd_simulate(config: &RunConfig, dump: Option<&Path>) -> Result<String> {
    let base = SimulationModel {
        n: config.n.context("n is required")?,
        p: config.p.context("p is required")?,
        tau_star: config.tau_star,
        delta1: 0.0,
        delta2: 1.0,
        cov_scenario: config.scenario.unwrap_or(CovScenario::Ar1),
        error_dist: config.error_dist.unwrap_or(ErrorDist::Normal),
        seed: config.seed.unwrap_or(1),
        sqrt_method: config.sqrt_method.unwrap_or_default(),
    };
    let reps = config.reps.context("reps is required")?;
    let parallelism = config.parallelism.unwrap_or(1);

    let mut results = Vec::new();
    for &delta1 in &config.delta1 {
        for &delta2 in &config.delta2 {
            let model = SimulationModel { delta1, delta2, ..base.clone() };
            model.validate()?;
            if results.is_empty() {
                if let Some(path) = dump {
                    let data = Design::from_model(&model)?.sample(replication_seed(model.seed, 0))?;
                    let file =
                        std::fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
                    csv_io::write_dataset(&data, std::io::BufWriter::new(file))?;
                }
            }
            let report = cpjoint::run_experiment(&model, reps, config.alpha, config.lambda, parallelism)?;
            results.push(Setting { delta1, delta2, tau_star: model.tau_star, report });
        }
    }

    match config.output_format {
        Format::Json => to_json(&SimulateReport { spec_version: SPEC_VERSION, config, results }),
        Format::Csv => {
            let rows: Vec<Vec<String>> = results
                .iter()
                .flat_map(|s| {
                    s.report.methods.iter().map(move |m| {
                        vec![
                            num(s.delta1),
                            num(s.delta2),
                            s.tau_star.map_or_else(String::new, |t| t.to_string()),
                            m.method.name().to_owned(),
                            s.report.rep_count.to_string(),
                            num(m.rejection_rate),
                            num(m.mc_stderr),
                            m.mean_abs_error.map_or_else(String::new, num),
                        ]
                    })
                })
                .collect();
            to_csv(
                &["delta1", "delta2", "tau_star", "method", "reps", "rejection_rate", "mc_stderr", "mean_abs_error"],
                &rows,
            )
        }
    }
}
