mod common;
mod pmf;
mod simulate;
mod suites;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Exact laws, reproducible samplers, and verification suites for weighted
/// planar Poisson fields and their signed and fractional variants.
#[derive(Parser)]
#[command(name = "poisson-fields", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a probability mass function with certified tail bounds.
    Pmf(pmf::PmfArgs),
    /// Draw reproducible samples and write a run manifest.
    Simulate(simulate::SimulateArgs),
    /// Run a verification suite and emit a machine-readable report.
    Verify(suites::VerifyArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Pmf(args) => pmf::run(&args),
        Command::Simulate(args) => simulate::run(&args),
        Command::Verify(args) => suites::run(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
