//! `midmon`: select, instrument, validate and evaluate mid-circuit monitors
//! for OpenQASM 2.0 circuits.
//!
//! Exit status: 0 on success, 1 when validation fails, 2 on bad input.

mod commands;
mod config;
mod error;
mod manifest;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{AnalyzeArgs, EvaluateArgs, InstrumentArgs, ValidateArgs};
use config::RunConfig;
use error::CliError;
use report::write_text;

#[derive(Parser, Debug)]
#[command(name = "midmon", version, about = "Mid-circuit measurement monitors for quantum circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report monitorable nodes, the budget-filtered selection and coverage.
    Analyze {
        #[command(flatten)]
        args: AnalyzeArgs,
        #[command(flatten)]
        config: RunConfig,
    },
    /// Emit the instrumented circuit as QASM plus a bit-layout manifest.
    Instrument {
        #[command(flatten)]
        args: InstrumentArgs,
        #[command(flatten)]
        config: RunConfig,
    },
    /// Check that instrumentation preserves the circuit's behavior.
    Validate {
        #[command(flatten)]
        args: ValidateArgs,
        #[command(flatten)]
        config: RunConfig,
    },
    /// Run the mutation study over a directory of circuits.
    Evaluate {
        #[command(flatten)]
        args: EvaluateArgs,
        #[command(flatten)]
        config: RunConfig,
    },
    /// Report node, qubit and depth coverage.
    Coverage {
        #[command(flatten)]
        args: AnalyzeArgs,
        #[command(flatten)]
        config: RunConfig,
    },
}

const EXIT_VALIDATION_FAILED: u8 = 1;
const EXIT_INPUT_ERROR: u8 = 2;

fn run(command: Command) -> Result<bool, CliError> {
    let (config, report) = match command {
        Command::Analyze { args, config } => {
            config.check()?;
            let r = commands::analyze(&args, &config)?;
            (config, r)
        }
        Command::Coverage { args, config } => {
            config.check()?;
            let r = commands::coverage(&args, &config)?;
            (config, r)
        }
        Command::Instrument { args, config } => {
            config.check()?;
            commands::instrument(&args, &config)?;
            return Ok(true);
        }
        Command::Validate { args, config } => {
            config.check()?;
            let (r, pass) = commands::validate_cmd(&args, &config)?;
            write_text(config.output.as_deref(), &r)?;
            return Ok(pass);
        }
        Command::Evaluate { args, config } => {
            config.check()?;
            let r = commands::evaluate(&args, &config)?;
            (config, r)
        }
    };
    write_text(config.output.as_deref(), &report)?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VALIDATION_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT_ERROR)
        }
    }
}
