use std::process::ExitCode;

use clap::Parser;
use msis_core::scenario::{run, Cli};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("msis: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
