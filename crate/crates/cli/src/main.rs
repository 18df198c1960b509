//! `tara`: simulate CHSH data, calibrate detectors and run them.
//!
//! Exit codes: 0 classical or success, 10 quantum detected, 2 usage or
//! config error, 3 runtime error.

mod args;
mod detect;
mod output;
mod report;
mod simulate;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use output::CliError;

pub const EXIT_QUANTUM: u8 = 10;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

/// What a subcommand concluded, mapped onto the exit code.
pub enum Outcome {
    Done,
    Classical,
    Quantum,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(Outcome::Quantum) => ExitCode::from(EXIT_QUANTUM),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Simulate(a) => simulate::run(&cli.global, a),
        Command::Calibrate(a) => detect::calibrate(&cli.global, a),
        Command::DetectBatch(a) => detect::detect_batch(&cli.global, a),
        Command::DetectStream(a) => detect::detect_stream(&cli.global, a),
        Command::Roc(a) => report::roc(&cli.global, a),
        Command::Leakage(a) => report::leakage(&cli.global, a),
        Command::HardwareReport(a) => report::hardware(&cli.global, a),
    }
}
