//! `gradkit`: reproducible gradient-descent experiments.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 divergence, 4 failed
//! gradient check.

mod commands;
mod manifest;
mod output;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "gradkit", version, about = "Gradient-descent experiments with hand-written autodiff")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Linear regression (sum of squared residuals) by full-batch gradient descent.
    FitLinear(FitLinear),
    /// Logistic regression by gradient descent, or mini-batch SGD with --batch-size.
    FitLogistic(FitLogistic),
    /// One-hidden-layer sigmoid network trained with back-propagated gradients.
    FitMlp(FitMlp),
    /// Logistic-regression SGD for several batch sizes, with traces and plots.
    SgdSweep(SgdSweep),
    /// Compare analytic, reverse-mode and finite-difference gradients.
    GradCheck(GradCheck),
    /// Write the synthetic two-class circle data set.
    GenCircle(GenCircle),
    /// Re-run the command recorded in a manifest.
    Rerun(Rerun),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DataArgs {
    /// Comma-separated file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Response column.
    #[arg(long, default_value = "label")]
    pub response: String,
    /// Feature columns (comma-separated); all other columns when omitted.
    #[arg(long, value_delimiter = ',')]
    pub features: Vec<String>,
    /// Encode the response as 1 for this label and 0 otherwise.
    #[arg(long)]
    pub positive: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FitLinear {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 1e-4)]
    pub lr: f64,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    /// L2 penalty weight; the intercept is never penalized.
    #[arg(long, default_value_t = 0.0)]
    pub l2: f64,
    #[arg(long, default_value_t = 1000)]
    pub trace_every: usize,
    /// Output directory for params.toml, trace.csv and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
}

/// How a mini-batch gradient is scaled.
///
/// `sum` adds per-row gradients without dividing by the batch size (the
/// behaviour of the reference R code); `mean` divides by the batch size, as
/// in the textbook SGD update. They differ by a factor |B| in the effective
/// learning rate.
#[derive(ValueEnum, Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizeArg {
    #[default]
    Sum,
    Mean,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FitLogistic {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 0.005)]
    pub lr: f64,
    #[arg(long, default_value_t = 20000)]
    pub iters: usize,
    /// Rows per step; 0 runs full-batch gradient descent on the data in file
    /// order, anything else shuffles the rows with --seed and runs SGD.
    #[arg(long, default_value_t = 0)]
    pub batch_size: usize,
    #[arg(long, env = "GRADKIT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = NormalizeArg::Sum)]
    pub normalize: NormalizeArg,
    #[arg(long, default_value_t = 0.0)]
    pub l2: f64,
    #[arg(long, default_value_t = 1000)]
    pub trace_every: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FitMlp {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 4)]
    pub hidden: usize,
    #[arg(long, default_value_t = 0.003)]
    pub lr: f64,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    /// Seed for the weight initialization.
    #[arg(long, env = "GRADKIT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub trace_every: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SgdSweep {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_delimiter = ',', default_value = "5,15,30")]
    pub batch_sizes: Vec<usize>,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 200_000)]
    pub iters: usize,
    /// Seed for the one-off row shuffle shared by every leg.
    #[arg(long, env = "GRADKIT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = NormalizeArg::Sum)]
    pub normalize: NormalizeArg,
    #[arg(long, default_value_t = 1000)]
    pub trace_every: usize,
    /// Coefficient to plot (0 is the intercept).
    #[arg(long, default_value_t = 0)]
    pub coordinate: usize,
    /// Draw a dashed horizontal line at this value.
    #[arg(long)]
    pub reference: Option<f64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Linear,
    Logistic,
    Mlp,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GradCheck {
    /// Model to check; all three when omitted.
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-5)]
    pub h: f64,
    #[arg(long, env = "GRADKIT_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GenCircle {
    /// Points per class.
    #[arg(long, default_value_t = 75)]
    pub n: usize,
    #[arg(long, env = "GRADKIT_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output CSV; the manifest is written next to it as <out>.manifest.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Rerun {
    pub manifest: PathBuf,
    /// Where to write the reproduced artifacts (a directory, or the CSV path
    /// for gen-circle).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Divergence(String),
    #[error("{0}")]
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Divergence(_) => 3,
            Failure::Check(_) => 4,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::Data(format!("{}: {e}", path.display()))
    }
}

impl From<gradkit::Error> for Failure {
    fn from(e: gradkit::Error) -> Self {
        match e {
            gradkit::Error::Divergence { .. } => Failure::Divergence(e.to_string()),
            gradkit::Error::InvalidConfig(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
