//! Command-line front end: selftests, marches, fixed-point runs, blow-up
//! studies and lifespan sweeps with reproducible configs and
//! machine-readable outputs.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

/// Exit codes: 0 success, 1 numerical failure, 2 configuration error,
/// 3 I/O failure.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

impl From<semiwave::Error> for CliError {
    fn from(e: semiwave::Error) -> Self {
        use semiwave::Error::*;
        match &e {
            InvalidData(_) | InvalidParams(_) | Grid(_) | InsufficientData(_) => {
                CliError::Config(e.to_string())
            }
            NonFiniteInput { .. } | EstimationFailed(_) | InfiniteLifespan => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

#[derive(Parser)]
#[command(
    name = "semiwave",
    about = "1D semilinear wave equations with derivative nonlinearities on characteristic grids",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the operator and free-wave invariant suites.
    Selftest(CliArgs),
    /// March the Riemann invariants to the final time or blow-up.
    Solve(CliArgs),
    /// Iterate the integral equations to their fixed point.
    Picard(CliArgs),
    /// Estimate the blow-up time and emit the per-characteristic curve.
    Blowup(CliArgs),
    /// Sweep amplitudes and fit the lifespan scaling exponent.
    Sweep(CliArgs),
    /// Print the closed-form blow-up time for given M, eps, p.
    Oracle(CliArgs),
}

/// Flags override values from --config; every run echoes the effective
/// configuration into its outputs.
#[derive(Args, Debug, Default)]
struct CliArgs {
    /// Plain key=value configuration file.
    #[arg(long)]
    config: Option<String>,
    /// Nonlinearity: general | special+ | special-
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Comma-separated amplitudes for sweeps.
    #[arg(long = "eps-list", value_delimiter = ',')]
    eps_list: Option<Vec<f64>>,
    /// Mesh width (time step and space step).
    #[arg(long)]
    h: Option<f64>,
    /// Final time / time cap.
    #[arg(long = "T")]
    t: Option<f64>,
    /// Support radius of the data.
    #[arg(long = "R")]
    r: Option<f64>,
    /// Data family: bump | traveling+ | traveling-
    #[arg(long)]
    family: Option<String>,
    #[arg(long = "amp-f")]
    amp_f: Option<f64>,
    #[arg(long = "amp-g")]
    amp_g: Option<f64>,
    /// Residual tolerance for the fixed-point iteration.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    /// Amplitude threshold treated as numerical blow-up.
    #[arg(long)]
    threshold: Option<f64>,
    /// Primary output file (CSV or JSON depending on the command).
    #[arg(long)]
    out: Option<String>,
    /// Worker threads for sweeps.
    #[arg(long)]
    jobs: Option<usize>,
    /// Seed for the randomized invariant suites.
    #[arg(long)]
    seed: Option<u64>,
    /// Characteristic amplitude for the oracle command (defaults to the
    /// peak amplitude of the configured data).
    #[arg(long)]
    m: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    type CmdFn = fn(&RunConfig) -> Result<(), CliError>;
    let (args, run): (&CliArgs, CmdFn) = match &cli.cmd {
        Cmd::Selftest(a) => (a, commands::cmd_selftest),
        Cmd::Solve(a) => (a, commands::cmd_solve),
        Cmd::Picard(a) => (a, commands::cmd_picard),
        Cmd::Blowup(a) => (a, commands::cmd_blowup),
        Cmd::Sweep(a) => (a, commands::cmd_sweep),
        Cmd::Oracle(a) => (a, commands::cmd_oracle),
    };
    let config = match RunConfig::resolve(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return ExitCode::from(e.code());
        }
    };
    match run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
