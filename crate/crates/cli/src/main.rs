//! `maxsurf`: sample, verify, solve and analyse maximal surfaces in ℝ³₁.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod asymptotics;
mod conjugate;
mod options;
mod plateau;
mod sample;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use options::{load_config, merge, CliError, CmdResult};

#[derive(Parser, Debug)]
#[command(name = "maxsurf", version, about = "Numerical toolkit for maximal surfaces in Lorentz-Minkowski space")]
struct Cli {
    /// JSON object whose keys are long flag names of the chosen subcommand.
    /// Flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a catalog surface and export it as OBJ or CSV.
    Sample(sample::SampleArgs),
    /// Run verification suites on a catalog model or a sampled CSV.
    Verify(verify::VerifyArgs),
    /// Solve the Dirichlet problem for a maximal graph.
    Plateau(plateau::PlateauArgs),
    /// Write a disc mask and boundary data taken from a fixture graph.
    Disc(plateau::DiscArgs),
    /// Blow-up/blow-down limits, τ-measures and rotation numbers.
    Asymptotics(asymptotics::AsymptoticsArgs),
    /// Conjugate immersions of catalog models or conjugate graphs.
    Conjugate(conjugate::ConjugateArgs),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("MAXSURF_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("MAXSURF_THREADS must be a non-negative integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure worker threads: {e}")))
}

fn run(cli: Cli) -> CmdResult {
    configure_threads()?;
    let config = cli.config.as_deref().map(load_config).transpose()?;
    let config = config.as_ref();
    match cli.command {
        Command::Sample(a) => sample::run(merge(a, config)?),
        Command::Verify(a) => verify::run(merge(a, config)?),
        Command::Plateau(a) => plateau::run(merge(a, config)?),
        Command::Disc(a) => plateau::run_disc(merge(a, config)?),
        Command::Asymptotics(a) => asymptotics::run(merge(a, config)?),
        Command::Conjugate(a) => conjugate::run(merge(a, config)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Failed(msg)) => {
            eprintln!("maxsurf: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("maxsurf: {msg}");
            ExitCode::from(2)
        }
    }
}
