//! `agp`: command-line front end for approximate graph propagation.
//!
//! Exit status is 0 on success, 1 on usage errors and 2 on data errors.

mod args;
mod commands;
mod context;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use context::UsageError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            // Prints help and version to stdout, everything else to stderr.
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Propagate(a) => commands::propagate(a),
        Command::Groundtruth(a) => commands::groundtruth(a),
        Command::Cluster(a) => commands::cluster(a),
        Command::Features(a) => commands::features(a),
        Command::Eval(a) => commands::eval(a),
        Command::Mc(a) => commands::mc(a),
        Command::Convert(a) => commands::convert(a),
        Command::Tradeoff(a) => commands::tradeoff(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            eprintln!("run `agp --help` for usage");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
