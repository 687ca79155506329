mod args;
mod commands;
mod error;
mod source;
mod table;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use serde_json::Value;

use args::{Cli, Command, OutputFormat};
use commands::Outcome;
use error::{CliError, CliResult};

fn emit(cli: &Cli, report: &Value) -> CliResult<()> {
    let text = match (cli.format, report) {
        (_, Value::String(raw)) => raw.clone(),
        (OutputFormat::Json, _) => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        (OutputFormat::Table, _) => table::render(report),
    };
    match &cli.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::io(path.display().to_string(), e))
        }
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("stdout", e)),
    }
}

fn finish(cli: &Cli, outcome: Outcome) -> CliResult<()> {
    emit(cli, &outcome.report)?;
    match outcome.violation {
        Some(message) => Err(CliError::Violation(message)),
        None => Ok(()),
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    if !(cli.epsilon.is_finite() && cli.epsilon >= 0.0) {
        return Err(CliError::Usage(format!(
            "--epsilon must be a finite non-negative number, got {}",
            cli.epsilon
        )));
    }
    let eps = cli.epsilon;
    match &cli.command {
        Command::Analyze(a) => finish(cli, commands::analyze(a, eps)?),
        Command::Exploit(a) => finish(cli, commands::exploit(a, eps)?),
        Command::Verify(a) => finish(cli, commands::verify(a, eps)?),
        Command::Replay(a) => finish(cli, commands::replay(a, eps)?),
        Command::Catalog(a) => emit(cli, &commands::catalog(a)?),
        Command::Duel(a) => {
            let stdin = io::stdin();
            let mut input = stdin.lock();
            let mut output = io::stdout();
            let transcript = commands::duel(a, eps, &mut input, &mut output)?;
            match &cli.out {
                Some(_) => emit(cli, &transcript),
                None => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
