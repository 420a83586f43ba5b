use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use pensemble_core::eval::EvalMode;
use pensemble_core::BaseKind;

#[derive(Debug, Parser)]
#[command(
    name = "pensemble",
    version,
    about = "Evolving ensemble fuzzy classifier for drifting data streams"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic stream as CSV.
    Gen(GenArgs),
    /// Train and evaluate on a CSV file or a generated stream.
    Run(Box<RunArgs>),
    /// Print a metrics file.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    Sea,
    Hyperplane,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: Generator,
    /// Number of samples.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Label noise fraction.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// SEA class-2 share; 0 keeps the natural balance.
    #[arg(long)]
    pub minority: Option<f64>,
    /// Hyperplane dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Holdout,
    Cv,
}

impl From<ModeArg> for EvalMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Holdout => EvalMode::Holdout,
            ModeArg::Cv => EvalMode::Cv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseArg {
    Axis,
    Multivariate,
}

impl From<BaseArg> for BaseKind {
    fn from(b: BaseArg) -> Self {
        match b {
            BaseArg::Axis => BaseKind::AxisParallel,
            BaseArg::Multivariate => BaseKind::Multivariate,
        }
    }
}

/// Every option of `run`. A TOML config file uses the same names as keys;
/// flags given on the command line win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunArgs {
    /// TOML file with defaults for any of these options.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// CSV input with feature columns followed by `class`.
    #[arg(long, conflicts_with = "gen")]
    pub data: Option<PathBuf>,
    /// Built-in generator to stream from.
    #[arg(long, value_enum)]
    pub gen: Option<Generator>,
    /// Generated stream length.
    #[arg(long)]
    pub n: Option<usize>,
    /// Generator label noise.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Chunk size.
    #[arg(long)]
    pub chunk: Option<usize>,
    #[arg(long)]
    pub stamps: Option<usize>,
    /// Training samples per stamp.
    #[arg(long)]
    pub train: Option<usize>,
    /// Test samples per stamp.
    #[arg(long)]
    pub test: Option<usize>,
    #[arg(long, value_enum)]
    pub base: Option<BaseArg>,
    /// Initial conflict threshold.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Accept only samples that conflict in both input and output space.
    #[arg(long)]
    pub al_conjunction: bool,
    #[arg(long)]
    pub delta_rel: Option<f64>,
    /// Absolute merge threshold; replaces the relative one.
    #[arg(long)]
    pub delta_abs: Option<f64>,
    #[arg(long)]
    pub alpha_warn: Option<f64>,
    #[arg(long)]
    pub alpha_drift: Option<f64>,
    /// Penalty factor for voting weights.
    #[arg(long)]
    pub p: Option<f64>,
    /// Number of features kept by online feature selection.
    #[arg(long)]
    pub ofs_b: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Metrics output (JSON lines).
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($field:ident),*) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl RunArgs {
    /// Options from `file` with every flag set on `self` taking precedence.
    pub fn over(self, mut file: RunArgs) -> RunArgs {
        let flags = self;
        overlay!(file, flags; data, gen, n, noise, mode, folds, chunk, stamps, train, test, base,
            theta, delta_rel, delta_abs, alpha_warn, alpha_drift, p, ofs_b, seed, metrics);
        file.al_conjunction |= flags.al_conjunction;
        file.config = flags.config;
        file
    }

    pub fn load_file(path: &Path) -> anyhow::Result<RunArgs> {
        let text = std::fs::read_to_string(path)?;
        Ok(toml::from_str(&text)?)
    }
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub metrics: PathBuf,
    /// Only print the summary record.
    #[arg(long)]
    pub summary: bool,
}
