//! `qubvp`: solve, sweep, extrapolate and dump grids from the command line.
//!
//! Exit codes: 0 success, 1 a solve did not converge, 2 bad arguments or input.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use args::{GridArgs, OutputArgs, RunArgs};

#[derive(Debug, Parser)]
#[command(
    name = "qubvp",
    version,
    about = "Box-scheme solver for boundary value problems on semi-infinite intervals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve once and write the nodal solution plus a summary.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Solve on doubling grids and tabulate report quantities with observed orders.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Only tabulate this report quantity.
        #[arg(long)]
        quantity: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Richardson-extrapolate one column of a sweep CSV.
    Extrapolate {
        /// Sweep CSV produced by `qubvp sweep`.
        input: std::path::PathBuf,
        /// Column to extrapolate; defaults to the first quantity column.
        #[arg(long)]
        quantity: Option<String>,
        /// Restrict to these grid sizes (comma list).
        #[arg(long = "N", value_delimiter = ',')]
        n: Vec<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Write the nodes of a quasi-uniform grid.
    Grid {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] qubvp::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    /// The output was written but at least one solve failed.
    #[error("{0}")]
    NotConverged(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::NotConverged(_) => 1,
            CliError::Core(qubvp::Error::Singular { .. } | qubvp::Error::Evaluation { .. }) => 1,
            _ => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { run, out } => commands::solve(&run, &out),
        Command::Sweep { run, quantity, out } => commands::sweep(&run, quantity.as_deref(), &out),
        Command::Extrapolate {
            input,
            quantity,
            n,
            out,
        } => commands::extrapolate(&input, quantity.as_deref(), &n, &out),
        Command::Grid { grid, out } => commands::grid(&grid, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qubvp: {e}");
            ExitCode::from(e.code())
        }
    }
}
