use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "darkstate", version, about = "Dark states of driven, decaying multilevel systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the built-in presets.
    Presets,
    /// Structural checks of a system description.
    Validate(SystemArgs),
    /// Solve the rotating frame and report its cycle constraints.
    Rwa(ReportArgs),
    /// Classify the dark states of a system.
    Classify(ClassifyArgs),
    /// Propagate a density matrix in time.
    Evolve(EvolveArgs),
    /// Long-time observable on a two-parameter grid.
    Scan(ScanArgs),
    /// Dark manifolds of the ten 87Rb hyperfine schemes.
    #[command(name = "rb87-table")]
    Rb87Table(Rb87Args),
    /// Write a system in the JSON system file format.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Built-in preset name (see `darkstate presets`).
    #[arg(long)]
    pub preset: Option<String>,
    /// System JSON file.
    #[arg(long)]
    pub system: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Tolerance {
    /// Gap below which ground-diagonal energies count as degenerate.
    #[arg(long, default_value_t = 1e-8)]
    pub tol_degeneracy: f64,
    /// Relative singular-value threshold of the rank decision.
    #[arg(long, default_value_t = 1e-12)]
    pub tol_rank: f64,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    #[command(flatten)]
    pub source: Source,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub tolerance: Tolerance,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub tolerance: Tolerance,
    #[command(flatten)]
    pub output: Output,
    #[arg(long, default_value_t = 100.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// `e1`, `g2`, `mixed-ground`, a level label, or a JSON matrix file.
    #[arg(long, default_value = "e1")]
    pub rho0: String,
    /// Also report populations of the Hamiltonian eigenstates.
    #[arg(long)]
    pub eigenbasis: bool,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub tolerance: Tolerance,
    #[command(flatten)]
    pub output: Output,
    /// `PATH:MIN:MAX:N`, e.g. `energy:g2:-2:2:41`.
    #[arg(long)]
    pub axis_a: String,
    #[arg(long)]
    pub axis_b: String,
    #[arg(long, value_enum, default_value_t = ObservableArg::ExcitedPopulation)]
    pub observable: ObservableArg,
    #[arg(long, default_value = "e1")]
    pub rho0: String,
    /// Evaluate grid points one after another.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObservableArg {
    ExcitedPopulation,
    Purity,
}

#[derive(Debug, Args)]
pub struct Rb87Args {
    #[command(flatten)]
    pub tolerance: Tolerance,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
