//! `ghz-forge`: search, evaluate and time GHZ distillation protocols.
//!
//! Exit codes: 0 success, 2 usage, 3 input or output file, 4 internal.

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ghz_core::protocol::DEFAULT_SHOTS;

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "ghz-forge", version, about)]
struct Cli {
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, global = true, env = "GHZ_FORGE_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Search for the best protocol for an (n, k) target.
    Optimize(OptimizeArgs),
    /// Sweep a protocol's output fidelity over Bell fidelities.
    Evaluate(EvaluateArgs),
    /// Estimate generation steps by Monte Carlo execution.
    Montecarlo(MonteCarloArgs),
    /// Write one of the reference four-party protocols.
    Baseline(BaselineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Base,
    Random,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Number of parties.
    #[arg(long)]
    pub n: usize,
    /// Number of Bell pairs.
    #[arg(long)]
    pub k: usize,
    /// Bell pair fidelity.
    #[arg(long)]
    pub fidelity: f64,
    #[arg(long, value_enum, default_value_t = Algorithm::Random)]
    pub algorithm: Algorithm,
    /// Protocols stored per cell [default: 1 for base, 200 for random].
    #[arg(long)]
    pub buffer: Option<usize>,
    /// Annealing temperature; repeat to sweep [default: 1e-5..9e-4, 18 values].
    #[arg(long = "temperature")]
    pub temperatures: Vec<f64>,
    /// Repetitions per temperature [default: 1].
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Protocol JSON path; CSVs and the manifest are written beside it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Protocol JSON file.
    pub protocol: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    pub fmin: f64,
    #[arg(long, default_value_t = 1.0)]
    pub fmax: f64,
    #[arg(long, default_value_t = 21)]
    pub steps: usize,
    /// CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    /// Protocol JSON file.
    pub protocol: PathBuf,
    /// Bell pair fidelity; repeat for several rows.
    #[arg(long, required = true)]
    pub fidelity: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    pub shots: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BaselineName {
    Expedient,
    Stringent,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long, value_enum)]
    pub name: BaselineName,
    /// Protocol JSON path.
    #[arg(long)]
    pub out: PathBuf,
}

fn run(cli: &Cli) -> CliResult<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {} threads: {e}", cli.threads)))?;
    }
    match &cli.command {
        Command::Optimize(a) => commands::optimize(a),
        Command::Evaluate(a) => commands::evaluate_sweep(a),
        Command::Montecarlo(a) => commands::montecarlo(a),
        Command::Baseline(a) => commands::baseline(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
