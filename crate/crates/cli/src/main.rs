//! `sqrtlasso`: data generation, solvers, pathwise runs, benchmark sweeps
//! and the graph / multitask applications from the command line.
//!
//! Exit codes: 0 success, 1 usage, 2 nonsmooth-region stop, 3 no
//! convergence or partial result, 4 I/O.

mod commands;
mod error;
mod io;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = match commands::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version go to stdout and are not failures
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
