//! `secrecy`: evaluate, sweep and simulate the secrecy region of a model file.

mod commands;
mod error;
mod model;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CompareArgs, OracleArgs, RegionArgs, SimulateArgs, SweepArgs};

/// Exit codes: 0 success, 2 usage or parse error, 3 infeasible point,
/// 4 resource guard, 1 output failure.
#[derive(Debug, Parser)]
#[command(name = "secrecy", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Δ* at one operating point, with its decomposition and transmissibility check
    Region(RegionArgs),
    /// Tabulate one quantity along one axis
    Sweep(SweepArgs),
    /// Exact measurement of a toy seeded system
    Simulate(SimulateArgs),
    /// Systematic versus general codes on the four comparison criteria
    Compare(CompareArgs),
    /// Grid-search cross-check of a solver
    Oracle(OracleArgs),
}

impl Command {
    fn jobs(&self) -> Option<usize> {
        match self {
            Command::Region(a) => a.common.jobs,
            Command::Sweep(a) => a.common.jobs,
            Command::Simulate(a) => a.common.jobs,
            Command::Compare(a) => a.common.jobs,
            Command::Oracle(a) => a.common.jobs,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.command.jobs() {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: cannot start {jobs} workers: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Region(a) => commands::region(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Compare(a) => commands::compare(a),
        Command::Oracle(a) => commands::oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
