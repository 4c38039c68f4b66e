//! Command-line surface: subcommands, flags, and their parsed forms.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "qpt",
    version,
    about = "Simulate two-qubit trapped-ion CNOT gates and reconstruct them by process tomography"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply the configured gate program to the 16 tomography input states
    /// and write the ideal and simulated output density matrices.
    Simulate(RunArgs),
    /// Synthesize a tomography dataset, reconstruct the process matrix by
    /// linear inversion and likelihood fitting, and report metrics.
    Tomography(RunArgs),
    /// Compute the metric suite and bar-chart renderings for a stored
    /// process matrix.
    Analyze(AnalyzeArgs),
    /// Compare a measured double-gate report against the prediction
    /// composed from a single-gate report.
    Compare(CompareArgs),
}

/// Flags shared by the gate-running commands. Values given here override
/// the corresponding configuration-file fields.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON experiment configuration; defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Root seed for all randomness in the run.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Measurement shots per tomography setting.
    #[arg(long)]
    pub shots: Option<u64>,
    /// Record exact outcome probabilities instead of sampled counts.
    #[arg(long)]
    pub exact: bool,
    /// Pulse sequence variant.
    #[arg(long, value_enum)]
    pub sequence: Option<SequenceArg>,
    /// Number of gate applications (1 or 2).
    #[arg(long)]
    pub repetitions: Option<u8>,
    /// Worker threads; defaults to the machine parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Stored process matrix (chi file) to analyze.
    #[arg(long, value_name = "PATH")]
    pub chi: PathBuf,
    /// Ideal process the matrix is compared against.
    #[arg(long, value_enum, default_value = "a")]
    pub target: TargetArg,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Seed of the Haar ensemble behind the Monte-Carlo metrics.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Haar ensemble size for the Monte-Carlo metrics.
    #[arg(long, default_value_t = 50_000)]
    pub ensemble: usize,
    /// Worker threads; defaults to the machine parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Single-gate report (repetitions = 1).
    #[arg(long, value_name = "PATH")]
    pub single: PathBuf,
    /// Concatenated-gate report (repetitions = 2).
    #[arg(long, value_name = "PATH")]
    pub concat: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Worker threads; defaults to the machine parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SequenceArg {
    A,
    B,
}

impl From<SequenceArg> for ionsim_core::pulse::Variant {
    fn from(v: SequenceArg) -> Self {
        match v {
            SequenceArg::A => ionsim_core::pulse::Variant::A,
            SequenceArg::B => ionsim_core::pulse::Variant::B,
        }
    }
}

/// Reference process for the analyze command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    /// Single gate, sequence A.
    A,
    /// Single gate, sequence B.
    B,
    /// Two applications of sequence A (ideally the identity).
    Aa,
    /// Two applications of sequence B (ideally the identity).
    Bb,
    /// The identity process.
    Identity,
}
