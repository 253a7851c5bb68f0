//! `rrs`: command-line front end for the solver experiments.

mod args;
mod commands;
mod settings;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use rrs_core::Error;

/// 1 for bad input (flags, config, unreadable or malformed files), 2 for
/// numerical and domain failures.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Argument(_)
        | Error::Config(_)
        | Error::Parse { .. }
        | Error::Format(_)
        | Error::Io(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
