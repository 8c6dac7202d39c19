//! Command-line interface to the tailgauge library.
//!
//! Exit codes: 0 on success, 2 for validation problems (bad flags, malformed
//! files, impossible requests), 3 for numeric failures mid-computation.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tailgauge::Error;

#[derive(Parser)]
#[command(
    name = "tailgauge",
    version,
    about = "Gauge-function models for bivariate tail dependence",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a seeded synthetic sample from the benchmark catalog.
    Gen(commands::GenArgs),
    /// Threshold a sample and fit gauge families by maximum likelihood.
    Fit(commands::FitArgs),
    /// Classify a fitted gauge as asymptotically dependent or independent.
    Classify(commands::ClassifyArgs),
    /// Run the seeded classification benchmark over the scenario catalog.
    Benchmark(commands::BenchmarkArgs),
    /// Export the unit level set of a gauge as CSV.
    Levelset(commands::LevelsetArgs),
    /// Model-based chi(u) curve from a fitted model, as CSV.
    Chiplot(commands::ChiplotArgs),
    /// Estimate the probability of a rectangular tail region.
    Prob(commands::ProbArgs),
}

/// 2 for bad input or configuration, 3 for numeric failures mid-run.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numeric(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => commands::cmd_gen(a),
        Command::Fit(a) => commands::cmd_fit(a),
        Command::Classify(a) => commands::cmd_classify(a),
        Command::Benchmark(a) => commands::cmd_benchmark(a),
        Command::Levelset(a) => commands::cmd_levelset(a),
        Command::Chiplot(a) => commands::cmd_chiplot(a),
        Command::Prob(a) => commands::cmd_prob(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
