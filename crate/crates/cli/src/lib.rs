//! Library side of the `rxnident` command: argument types, the subcommands
//! and report rendering, so tests can drive the tool without a subprocess.

pub mod args;
pub mod commands;
pub mod format;

use std::time::Instant;

use clap::Parser;
use serde::Serialize;
use serde_json::Value;

pub use args::{Cli, Command};
pub use commands::{InputDigest, Outcome};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError(pub String);

impl CliError {
    pub fn new(msg: impl Into<String>) -> Self {
        CliError(msg.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CliError {}

impl From<rxnident_core::Error> for CliError {
    fn from(e: rxnident_core::Error) -> Self {
        CliError(e.to_string())
    }
}

/// Envelope shared by every `--json` report.
#[derive(Debug, Serialize)]
pub struct Report<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub arguments: &'a [String],
    pub inputs: &'a [InputDigest],
    pub exit_code: u8,
    pub result: &'a Value,
    /// Wall-clock time; the only field that varies between identical runs.
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone)]
pub struct Rendered {
    pub exit_code: u8,
    pub stdout: String,
    pub outcome: Outcome,
}

pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Validate(a) => commands::validate(a),
        Command::Report(a) => commands::report(a),
        Command::CheckIdent(a) => commands::check_ident(a),
        Command::CheckConfound(a) => commands::check_confound(a),
        Command::CheckConjugacy(a) => commands::check_conjugacy(a),
        Command::Simulate(a) => commands::simulate(a),
    }
}

/// Runs a parsed command and renders text or JSON. `arguments` is echoed
/// into the JSON report.
pub fn run(cli: &Cli, arguments: &[String]) -> Result<Rendered, CliError> {
    let start = Instant::now();
    let outcome = execute(&cli.command)?;
    let stdout = if cli.command.json() {
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        let report = Report {
            tool: "rxnident",
            version: env!("CARGO_PKG_VERSION"),
            command: cli.command.name(),
            arguments,
            inputs: &outcome.inputs,
            exit_code: outcome.exit_code,
            result: &outcome.result,
            elapsed_ms: (elapsed * 1e3).round() / 1e3,
        };
        let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
        s.push('\n');
        s
    } else {
        outcome.text.clone()
    };
    Ok(Rendered {
        exit_code: outcome.exit_code,
        stdout,
        outcome,
    })
}

/// Parse and run an argument list (without the program name).
pub fn run_args<I, S>(args: I) -> Result<Rendered, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let arguments: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(
        std::iter::once("rxnident".to_string()).chain(arguments.iter().cloned()),
    )
    .map_err(|e| CliError::new(e.to_string()))?;
    run(&cli, &arguments)
}

/// Caps the global rayon pool at `RXNIDENT_THREADS` when set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("RXNIDENT_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::new(format!(
                "RXNIDENT_THREADS: `{}` is not a positive integer",
                value
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::new(format!("thread pool: {}", e)))
}
