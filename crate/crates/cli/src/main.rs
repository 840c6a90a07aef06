//! `baire` — prefix-tree clustering, coincidence statistics, clusterwise
//! regression, and the linear-vs-quadratic benchmark, as a CLI.
//!
//! Exit codes: 0 success, 2 configuration/validation error, 3 I/O error,
//! 4 data error (malformed or unusable input content).

mod args;
mod commands;
mod errors;
mod outputs;
mod svg;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::errors::AppError;

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Cluster(args) => commands::cluster::run(args),
        Command::Stats(args) => commands::stats::run(args),
        Command::Regress(args) => commands::regress::run(args),
        Command::Bench(args) => commands::bench::run(args),
        Command::Synth(args) => commands::synth::run(args),
    }
}
