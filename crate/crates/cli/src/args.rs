use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rxnident_core::ModelSemantics;

#[derive(Debug, Parser)]
#[command(
    name = "rxnident",
    version,
    about = "Identifiability and confoundability of mass-action reaction networks under their Langevin dynamics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a network file and check its invariants.
    Validate(ValidateArgs),
    /// Print the drift A(x), diffusion B(x) and stoichiometric matrix.
    Report(ReportArgs),
    /// Decide whether rate constants are uniquely determined by the dynamics.
    CheckIdent(IdentArgs),
    /// Decide whether two networks can produce the same dynamics.
    CheckConfound(ConfoundArgs),
    /// Search for a linear conjugacy between two networks.
    CheckConjugacy(ConjugacyArgs),
    /// Euler–Maruyama paths of the Langevin equation, stopped on leaving a box.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Emit a JSON report instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub file: PathBuf,
    /// Comma-separated rates overriding those in the file, e.g. `1,4,1/2`.
    #[arg(long)]
    pub rates: Option<String>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct IdentArgs {
    pub file: PathBuf,
    #[arg(long, default_value = "sde")]
    pub model: ModelSemantics,
    /// Print a pair of distinct rate vectors with identical dynamics.
    #[arg(long)]
    pub witness: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ConfoundArgs {
    pub first: PathBuf,
    pub second: PathBuf,
    #[arg(long, default_value = "sde")]
    pub model: ModelSemantics,
    /// Print rate vectors for both networks giving identical dynamics.
    #[arg(long)]
    pub witness: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ConjugacyArgs {
    pub first: PathBuf,
    pub second: PathBuf,
    /// Relative residual accepted by the numerical search.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Random starts per permutation.
    #[arg(long, default_value_t = 10)]
    pub starts: usize,
    #[arg(long, default_value_t = 40_320)]
    pub max_perms: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub file: PathBuf,
    /// Initial state: one value for every species, or a comma-separated list.
    #[arg(long)]
    pub x0: String,
    /// Domain box: `LO:HI` for every species, or one `LO:HI` per species
    /// separated by commas. Defaults to 1e-6:1e3.
    #[arg(long = "box")]
    pub domain: Option<String>,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write paths as CSV here. Without it only summary statistics are printed.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Keep every k-th step in the CSV (the exit state is always kept).
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    /// Drop the noise term and integrate the mass-action ODE with explicit Euler.
    #[arg(long)]
    pub zero_diffusion: bool,
    #[arg(long)]
    pub rates: Option<String>,
    #[command(flatten)]
    pub output: Output,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Report(_) => "report",
            Command::CheckIdent(_) => "check-ident",
            Command::CheckConfound(_) => "check-confound",
            Command::CheckConjugacy(_) => "check-conjugacy",
            Command::Simulate(_) => "simulate",
        }
    }

    pub fn json(&self) -> bool {
        match self {
            Command::Validate(a) => a.output.json,
            Command::Report(a) => a.output.json,
            Command::CheckIdent(a) => a.output.json,
            Command::CheckConfound(a) => a.output.json,
            Command::CheckConjugacy(a) => a.output.json,
            Command::Simulate(a) => a.output.json,
        }
    }
}
