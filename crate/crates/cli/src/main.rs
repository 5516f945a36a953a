mod args;
mod commands;
mod render;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::commands::Failure;

/// Verification failure.
const EXIT_FAILED: u8 = 1;
/// Usage or domain error.
const EXIT_USAGE: u8 = 2;
/// Internal invariant violation.
const EXIT_INTERNAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Eval(a) => commands::eval(a, &cli.global),
        Command::Verify(a) => commands::verify(a, &cli.global),
        Command::Zeta(a) => commands::zeta(a, &cli.global),
        Command::Sieve(a) => commands::sieve(a, &cli.global),
    };
    let output = match outcome {
        Ok(output) => output,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            return ExitCode::from(EXIT_INTERNAL);
        }
    };

    // nothing is written until the whole report exists
    let written = match &cli.global.out {
        Some(path) => std::fs::write(path, &output.body),
        None => std::io::stdout().lock().write_all(output.body.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    if let Some(note) = &output.note {
        eprintln!("{note}");
    }
    if output.failed {
        ExitCode::from(EXIT_FAILED)
    } else {
        ExitCode::SUCCESS
    }
}
