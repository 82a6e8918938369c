//! `diqc`: batch driver for distributed approximate counting experiments.
//!
//! Exit codes: 0 success, 1 estimation failure (some run did not reach its
//! target width or a check suite failed), 2 usage or domain error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(diqc_core::Error),
}

impl From<diqc_core::Error> for CliError {
    fn from(e: diqc_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(diqc_core::Error::EstimationIncomplete { .. }) => 1,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

/// Whether every run in a command completed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Complete,
    SomeFailed,
}

#[derive(Parser)]
#[command(name = "diqc", version, about = "Distributed quantum approximate counting, simulated")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count the marked elements of a set over 2^k simulated nodes.
    Count(CountArgs),
    /// Estimate x·y = 2^-n Σ x_i y_i of two bit vectors.
    InnerProduct(PairArgs),
    /// Estimate the normalised Hamming distance of two bit vectors.
    Hamming(PairArgs),
    /// Sweep ε and compare a single node against MIQAE on one amplitude.
    CompareMiqae(CompareArgs),
    /// Tabulate qubits, gates and Q-depth against phase-estimation counting.
    Bench(BenchArgs),
    /// Run the analytic property suites.
    PropCheck(PropArgs),
}

#[derive(Args, Debug, Default)]
pub struct Common {
    /// JSON file with defaults for any flag (snake_case keys).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; without it only the JSON summary is printed.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct EstimationArgs {
    /// Nodes are 2^k.
    #[arg(long)]
    pub k: Option<u32>,
    /// Global target error ε; each node runs at ε/2^k.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Global significance α; each node runs at α/2^k.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Shots per measurement batch (N_0).
    #[arg(long)]
    pub n0: Option<u64>,
    #[arg(long)]
    pub reps: Option<u64>,
    /// Base seed; repetition r uses seed + r·2^k, node j adds j.
    #[arg(long)]
    pub seed: Option<u64>,
    /// analytic | statevector
    #[arg(long)]
    pub backend: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct CountArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub est: EstimationArgs,
    /// Marked-set file (one element per line, `#` comments).
    #[arg(long, conflicts_with = "marked")]
    pub set: Option<PathBuf>,
    /// Inline comma-separated decimal marked elements.
    #[arg(long)]
    pub marked: Option<String>,
    /// auto | decimal | bits
    #[arg(long)]
    pub format: Option<String>,
    /// Register width; required for decimal sets.
    #[arg(long)]
    pub n: Option<u32>,
    /// prefix | stride
    #[arg(long)]
    pub scheme: Option<String>,
    /// Also write the per-round trace (needs --out).
    #[arg(long)]
    pub trace: bool,
}

#[derive(Args, Debug, Default)]
pub struct PairArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub est: EstimationArgs,
    /// Bit-vector file for x.
    #[arg(long, conflicts_with = "x_bits")]
    pub x: Option<PathBuf>,
    /// Bit-vector file for y.
    #[arg(long, conflicts_with = "y_bits")]
    pub y: Option<PathBuf>,
    /// Inline bit string for x.
    #[arg(long)]
    pub x_bits: Option<String>,
    /// Inline bit string for y.
    #[arg(long)]
    pub y_bits: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    /// True amplitude a.
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Node register width used to scale DIQC estimates.
    #[arg(long)]
    pub m: Option<u32>,
    /// Comma-separated ε values.
    #[arg(long, value_delimiter = ',')]
    pub eps_sweep: Vec<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub n0: Option<u64>,
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Only `analytic` is supported here.
    #[arg(long)]
    pub backend: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated register widths n.
    #[arg(long = "n", value_delimiter = ',')]
    pub ns: Vec<u32>,
    #[arg(long)]
    pub k: Option<u32>,
}

#[derive(Args, Debug, Default)]
pub struct PropArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated suites; all when omitted.
    #[arg(long = "suite", value_delimiter = ',')]
    pub suites: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cases drawn by the randomized suites.
    #[arg(long)]
    pub cases: Option<u64>,
    /// Feed a suite a broken input to confirm it can fail.
    #[arg(long)]
    pub inject: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Count(a) => commands::count(a),
        Command::InnerProduct(a) => commands::pair(diqc_core::applications::Problem::Inner, a),
        Command::Hamming(a) => commands::pair(diqc_core::applications::Problem::Hamming, a),
        Command::CompareMiqae(a) => commands::compare_miqae(a),
        Command::Bench(a) => commands::bench(a),
        Command::PropCheck(a) => commands::prop_check(a),
    };
    match result {
        Ok(Outcome::Complete) => ExitCode::SUCCESS,
        Ok(Outcome::SomeFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
