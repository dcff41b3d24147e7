//! `cpjoint`: detect and localize a joint mean/covariance changepoint in a
//! CSV dataset, or run the Monte Carlo simulation designs.

mod csv_io;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cpjoint::{CovScenario, ErrorDist, SqrtMethod};

use crate::report::RunConfig;

/// Environment variable that overrides `--parallelism`.
pub const THREADS_ENV: &str = "CPJOINT_THREADS";

#[derive(Parser, Debug)]
#[command(name = "cpjoint", version, about = "Joint mean and covariance changepoint detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Test for a change in mean and/or covariance.
    Detect {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Estimate the changepoint location.
    Localize {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 0.2)]
        lambda: f64,
        /// Include the combined per-split profile in the report.
        #[arg(long)]
        emit_profile: bool,
    },
    /// Run a Monte Carlo experiment over the simulation designs.
    Simulate(SimArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// CSV file: rows are observations, columns variables.
    #[arg(long, short)]
    input: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScenarioArg {
    Ar1,
    Block5,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DistArg {
    Normal,
    T9,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SqrtArg {
    Spectral,
    Cholesky,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long, value_enum, default_value_t = ScenarioArg::Ar1)]
    scenario: ScenarioArg,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    p: usize,
    /// Changepoint as a fraction of n (floor(frac * n)); omit for no change.
    #[arg(long, conflicts_with = "tau")]
    tau_frac: Option<f64>,
    /// Changepoint index; omit for no change.
    #[arg(long)]
    tau: Option<usize>,
    /// Mean-shift size, or a comma-separated sweep.
    #[arg(long, default_value = "0")]
    delta1: String,
    /// Post-change covariance scale, or a comma-separated sweep.
    #[arg(long, default_value = "1")]
    delta2: String,
    #[arg(long, value_enum, default_value_t = DistArg::Normal)]
    dist: DistArg,
    #[arg(long, value_enum, default_value_t = SqrtArg::Spectral)]
    sqrt: SqrtArg,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.2)]
    lambda: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; the CPJOINT_THREADS environment variable takes precedence.
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
    /// Also write the first replication's dataset of the first setting as CSV.
    #[arg(long)]
    dump_dataset: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_grid(name: &str, raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| anyhow::anyhow!("--{name}: cannot parse {s:?} as a number")))
        .collect()
}

fn effective_parallelism(flag: usize) -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t >= 1 => Ok(t),
            _ => bail!("{THREADS_ENV}={v:?} is not a positive integer"),
        },
        Err(_) => Ok(flag.max(1)),
    }
}

fn sim_config(args: &SimArgs) -> Result<RunConfig> {
    if args.reps == 0 {
        return Err(cpjoint::Error::BadParam("--reps must be at least 1".into()).into());
    }
    let tau_star = match (args.tau, args.tau_frac) {
        (Some(t), _) => Some(t),
        (None, Some(f)) => {
            if !(f > 0.0 && f < 1.0) {
                return Err(cpjoint::Error::BadParam(format!("--tau-frac {f} outside (0, 1)")).into());
            }
            Some((f * args.n as f64).floor() as usize)
        }
        (None, None) => None,
    };
    Ok(RunConfig {
        command: "simulate",
        input_path: None,
        alpha: args.alpha,
        lambda: args.lambda,
        scenario: Some(match args.scenario {
            ScenarioArg::Ar1 => CovScenario::Ar1,
            ScenarioArg::Block5 => CovScenario::Block5,
        }),
        n: Some(args.n),
        p: Some(args.p),
        tau_star,
        delta1: parse_grid("delta1", &args.delta1)?,
        delta2: parse_grid("delta2", &args.delta2)?,
        error_dist: Some(match args.dist {
            DistArg::Normal => ErrorDist::Normal,
            DistArg::T9 => ErrorDist::T9Standardized,
        }),
        sqrt_method: Some(match args.sqrt {
            SqrtArg::Spectral => SqrtMethod::Spectral,
            SqrtArg::Cholesky => SqrtMethod::Cholesky,
        }),
        reps: Some(args.reps),
        seed: Some(args.seed),
        parallelism: Some(effective_parallelism(args.parallelism)?),
        output_format: args.output.format,
        emit_profile: false,
    })
}

fn emit(output: &OutputArgs, body: &str) -> Result<()> {
    match &output.output {
        Some(path) => std::fs::write(path, body)?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Detect { input, alpha } => {
            let config = RunConfig::for_input("detect", &input.input, alpha, 0.2, input.output.format, false);
            emit(&input.output, &report::cmd_detect(&config)?)
        }
        Command::Localize { input, lambda, emit_profile } => {
            let config =
                RunConfig::for_input("localize", &input.input, 0.05, lambda, input.output.format, emit_profile);
            emit(&input.output, &report::cmd_localize(&config)?)
        }
        Command::Simulate(args) => {
            let config = sim_config(&args)?;
            emit(&args.output, &report::cmd_simulate(&config, args.dump_dataset.as_deref())?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            match err.downcast_ref::<cpjoint::Error>() {
                Some(e) => eprintln!("error [{}]: {err:#}", e.code()),
                None => eprintln!("error: {err:#}"),
            }
            ExitCode::FAILURE
        }
    }
}
