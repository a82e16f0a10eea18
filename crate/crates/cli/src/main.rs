//! `affinity` — scale documents on a continuum between reference classes.
//!
//! Subcommands: `fit` (estimate a reference model from labeled archetype
//! texts), `scale` (fit per-document affinities), `influence` (word-level
//! influence tables), `bootstrap` (sentence-block bootstrap standard errors),
//! and `compare` (the comparator scalers side by side).
//!
//! Exit codes: 0 on success, 2 for input or validation errors, 3 for
//! numerical failures such as non-convergence.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

use commands::CliError;

#[derive(Parser)]
#[command(name = "affinity", version, about = "Scale documents between reference classes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a reference model from labeled reference texts
    Fit(FitArgs),
    /// Fit per-document affinities against a reference model
    Scale(ScaleArgs),
    /// Word-level influence tables for fitted documents
    Influence(InfluenceArgs),
    /// Sentence-level block bootstrap standard errors
    Bootstrap(BootstrapArgs),
    /// Run the comparator scalers next to the affinity estimate
    Compare(CompareArgs),
}

#[derive(Args)]
pub struct VocabOpts {
    /// Keep word types appearing at least this often in the reference texts
    #[arg(long, default_value_t = 2)]
    pub min_count: u64,
    /// Stop-word list (one type per line, # comments); defaults to the
    /// bundled Snowball English list
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Disable stop-word filtering entirely
    #[arg(long, conflicts_with = "stopwords")]
    pub no_stopwords: bool,
}

#[derive(Args)]
pub struct FitArgs {
    /// Reference corpus JSONL; each record needs a `class` field
    #[arg(long)]
    pub refs: PathBuf,
    #[command(flatten)]
    pub vocab: VocabOpts,
    /// Add-alpha smoothing constant
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Output model JSON path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
pub struct ScaleArgs {
    /// Model JSON from `fit`
    #[arg(long)]
    pub model: PathBuf,
    /// Documents JSONL
    #[arg(long)]
    pub docs: PathBuf,
    /// Log-penalty weight
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    /// Newton iteration cap
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Output path
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Print floats with 4 significant digits instead of 17
    #[arg(long)]
    pub human: bool,
}

#[derive(Args)]
pub struct InfluenceArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub docs: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    /// Per-(document, word) influence CSV
    #[arg(long)]
    pub out_entries: PathBuf,
    /// Per-word summary CSV
    #[arg(long)]
    pub out_summary: PathBuf,
    /// Report influence values multiplied by 100
    #[arg(long)]
    pub x100: bool,
    #[arg(long)]
    pub human: bool,
}

#[derive(Args)]
pub struct BootstrapArgs {
    /// Reference corpus JSONL with `class` fields
    #[arg(long)]
    pub refs: PathBuf,
    /// Documents JSONL
    #[arg(long)]
    pub docs: PathBuf,
    #[command(flatten)]
    pub vocab: VocabOpts,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    /// Number of bootstrap replicates
    #[arg(long, default_value_t = 100)]
    pub b: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output CSV path
    #[arg(long)]
    pub out: PathBuf,
    /// Also write one row per replicate to this CSV
    #[arg(long)]
    pub dump_replicates: Option<PathBuf>,
    #[arg(long)]
    pub human: bool,
}

#[derive(Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub docs: PathBuf,
    /// Dictionary JSON with `positive` and `negative` word lists
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    /// Comparison CSV path
    #[arg(long)]
    pub out: PathBuf,
    /// Correlation-matrix JSON path
    #[arg(long)]
    pub out_corr: Option<PathBuf>,
    #[arg(long)]
    pub human: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => commands::fit(args),
        Command::Scale(args) => commands::scale(args),
        Command::Influence(args) => commands::influence_cmd(args),
        Command::Bootstrap(args) => commands::bootstrap_cmd(args),
        Command::Compare(args) => commands::compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
