//! `muntz`: command-line front end for the Muntz-system toolkit.
//!
//! Exit status is 0 when every check passes, 1 when a verification fails or
//! the library reports a numerical error and 2 on usage errors.

mod commands;
mod config;
mod report;
mod seq;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use muntz_core::MuntzError;

use config::{Command, Params, Quadrature, RunConfig, OUT_DIR_ENV};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Numerical(#[from] MuntzError),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "muntz", version, about = "Muntz systems on a sector: products, functionals, recovery and surgery")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

/// Options shared by every subcommand. Flags override the config file.
#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration; unknown fields are rejected
    #[arg(long)]
    config: Option<PathBuf>,
    /// Exponent sequence: power:p, arithmetic:a:d, progression:b, perturbed:a:d:eps or list:x1,x2,...
    #[arg(long)]
    seq: Option<String>,
    /// Materialization horizon for generated sequences
    #[arg(long)]
    horizon: Option<f64>,
    /// Sector half-angle in [0, pi)
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the summary and CSV tables (default: $MUNTZ_OUT_DIR)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    panels_per_unit: Option<usize>,
    #[arg(long)]
    radial_cutoff: Option<f64>,
    #[arg(long)]
    cutoff_radius: Option<f64>,
    /// Run every grid and quadrature loop on one thread
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Args)]
struct PointsArgs {
    #[command(flatten)]
    common: Common,
    /// Number of sample points
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Debug, Args)]
struct FuchsEvalArgs {
    #[command(flatten)]
    common: Common,
    /// Evaluation point, e.g. 1.5+2i
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    /// Fixed number of explicit factors (default: adaptive)
    #[arg(long)]
    truncation: Option<usize>,
}

#[derive(Debug, Args)]
struct FuchsVerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Debug, Args)]
struct SurgeryArgs {
    #[command(flatten)]
    common: Common,
    /// The comparison sequence, in the same mini-language as --seq
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Debug, Args)]
struct BiorthoArgs {
    #[command(flatten)]
    common: Common,
    /// Matrix size
    #[arg(long)]
    terms: Option<usize>,
    /// Damping (default: 1/lambda_K)
    #[arg(long)]
    delta: Option<f64>,
    /// Growth rate b of the characteristic logarithm
    #[arg(long)]
    b: Option<f64>,
}

#[derive(Debug, Args)]
struct RecoverArgs {
    #[command(flatten)]
    common: Common,
    /// Coefficients of the synthetic input sum a_k zeta^(lambda_k)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    coefficients: Option<Vec<f64>>,
    #[arg(long)]
    terms: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Debug, Args)]
struct WitnessArgs {
    #[command(flatten)]
    common: Common,
    /// The excluded exponent
    #[arg(long)]
    mu: Option<f64>,
    /// Size of the least-squares fit
    #[arg(long)]
    terms: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Muntz density verdict and the characteristic logarithm table
    Density(PointsArgs),
    /// Evaluate the canonical product at one point
    FuchsEval(FuchsEvalArgs),
    /// Empirical constants of the two-sided growth bounds
    FuchsVerify(FuchsVerifyArgs),
    /// Build the subsequence of the target and check its residual
    Surgery(SurgeryArgs),
    /// Biorthogonality matrix of the damped functionals
    Biortho(BiorthoArgs),
    /// Recover the coefficients of a synthetic Muntz sum
    Recover(RecoverArgs),
    /// Distance lower bound from an excluded monomial to the span
    Witness(WitnessArgs),
    /// Boundary representation against direct kernel evaluation
    Crosscheck(PointsArgs),
}

impl Common {
    fn split(self, params: Params) -> (Option<PathBuf>, RunConfig) {
        let flags = RunConfig {
            command: None,
            seq: self.seq,
            horizon: self.horizon,
            alpha: self.alpha,
            seed: self.seed,
            output: self.out,
            quadrature: Quadrature {
                tolerance: self.tolerance,
                panels_per_unit: self.panels_per_unit,
                radial_cutoff: self.radial_cutoff,
                cutoff_radius: self.cutoff_radius,
                sequential: self.sequential.then_some(true),
            },
            params,
        };
        (self.config, flags)
    }
}

impl Sub {
    fn into_parts(self) -> (Command, Option<PathBuf>, RunConfig) {
        let p = Params::default();
        let (command, (path, flags)) = match self {
            Sub::Density(a) => (Command::Density, a.common.split(Params { points: a.points, ..p })),
            Sub::FuchsEval(a) => (Command::FuchsEval, a.common.split(Params { z: a.z, truncation: a.truncation, ..p })),
            Sub::FuchsVerify(a) => (Command::FuchsVerify, a.common.split(Params { r_max: a.r_max, points: a.points, ..p })),
            Sub::Surgery(a) => (Command::Surgery, a.common.split(Params { target: a.target, points: a.points, ..p })),
            Sub::Biortho(a) => (Command::Biortho, a.common.split(Params { terms: a.terms, delta: a.delta, b: a.b, ..p })),
            Sub::Recover(a) => (
                Command::Recover,
                a.common.split(Params { coefficients: a.coefficients, terms: a.terms, delta: a.delta, b: a.b, points: a.points, ..p }),
            ),
            Sub::Witness(a) => (Command::Witness, a.common.split(Params { mu: a.mu, terms: a.terms, ..p })),
            Sub::Crosscheck(a) => (Command::Crosscheck, a.common.split(Params { points: a.points, ..p })),
        };
        (command, path, flags)
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (command, path, flags) = cli.command.into_parts();
    let file = match path {
        Some(p) => RunConfig::load(&p)?,
        None => RunConfig::default(),
    };
    let env_out = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    let mut cfg = file.overlay(flags).resolve(command, env_out)?;
    let report = commands::run(command, &mut cfg)?;
    print!("{}", report::emit(&cfg, &report)?);
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("muntz: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
