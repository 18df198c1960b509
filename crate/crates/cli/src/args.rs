use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "tara", version, about = "Conformal and martingale detection of quantum CHSH correlations")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args)]
pub struct Global {
    /// Base seed for all randomness. Falls back to TARA_SEED, then the config file, then 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Progress diagnostics on stderr.
    #[arg(long, global = true)]
    pub verbose: bool,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    pub output_format: OutputFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Csv,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a seeded CHSH dataset.
    Simulate(SimulateArgs),
    /// Fit the conformal calibration (and optionally the envelope) on LHV data.
    Calibrate(CalibrateArgs),
    /// Batch decision on one dataset. Exit 10 when quantum.
    DetectBatch(DetectBatchArgs),
    /// Sequential test over a trial stream. Exit 10 when the wealth crosses 1/alpha.
    DetectStream(DetectStreamArgs),
    /// Feature ablation ROC study from an experiment config.
    Roc(ExperimentArgs),
    /// Same-family versus cross-family calibration experiment.
    Leakage(ExperimentArgs),
    /// CHSH arithmetic for one dataset, plus detector verdicts when a calibration is given.
    HardwareReport(HardwareArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    LhvDeterministic,
    LhvMixture,
    LhvDetection,
    LhvMemory,
    LhvCommunication,
    QuantumSinglet,
    PrBox,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleArg {
    RoundRobin,
    Uniform,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Generator config file; replaces --model and the parameter flags.
    #[arg(long, conflicts_with = "model")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "config")]
    pub model: Option<ModelKind>,
    /// Trials per measurement context.
    #[arg(long, required_unless_present = "config")]
    pub trials: Option<u64>,
    /// Click efficiency (lhv-detection, quantum-singlet) [default: 1]
    #[arg(long)]
    pub eta: Option<f64>,
    /// Signaling probability (lhv-communication) [default: 0]
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Correlator visibility (quantum-singlet) [default: 1]
    #[arg(long)]
    pub visibility: Option<f64>,
    /// Weight on the S = +2 strategies (lhv-mixture, lhv-memory, lhv-communication) [default: 1]
    #[arg(long)]
    pub bias: Option<f64>,
    /// History length (lhv-memory) [default: 1]
    #[arg(long)]
    pub order: Option<usize>,
    /// Outcomes a0,a1,b0,b1 in {-1,1} (lhv-deterministic) [default: 1,1,1,-1]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub strategy: Option<Vec<i8>>,
    #[arg(long, value_enum, default_value_t = ScheduleArg::RoundRobin)]
    pub schedule: ScheduleArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SubsetArg {
    Full,
    CpOnly,
    SOnly,
    ClickOnly,
}

#[derive(Args)]
pub struct CalibrateArgs {
    /// LHV dataset CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Calibration file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Envelope file to write; the second half of the input trains it.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    /// Trials per context in each envelope training block. Test datasets should match.
    #[arg(long, default_value_t = 500)]
    pub block_trials: usize,
    #[arg(long, value_enum, default_value_t = SubsetArg::Full)]
    pub subset: SubsetArg,
    #[arg(long, default_value_t = 1.0)]
    pub pseudo_count: f64,
    /// Conformal level for the expected set size feature.
    #[arg(long, default_value_t = 0.1)]
    pub set_alpha: f64,
    /// Envelope false positive rate on LHV blocks.
    #[arg(long, default_value_t = 0.05)]
    pub target_fpr: f64,
}

#[derive(Args)]
pub struct DetectBatchArgs {
    /// Envelope file from `calibrate --model-out`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub calibration: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Level of the two-sample KS branch.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Must match the value used at calibration.
    #[arg(long, default_value_t = 0.1)]
    pub set_alpha: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    SignOfHistory,
    Mixture,
}

#[derive(Args)]
pub struct DetectStreamArgs {
    #[arg(long)]
    pub calibration: PathBuf,
    /// Dataset CSV; reads stdin when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.2)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = StrategyArg::SignOfHistory)]
    pub strategy: StrategyArg,
    /// Bet with the current p-value. Not a valid test; for reproducing published trajectories only.
    #[arg(long)]
    pub unsafe_paper_kelly: bool,
}

#[derive(Args)]
pub struct ExperimentArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Permute class labels as a null control.
    #[arg(long)]
    pub shuffle_labels: bool,
    /// Also write the results as CSV to this path.
    #[arg(long)]
    pub csv_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct HardwareArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Column mapping sidecar for CSVs not in the trial format.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// Envelope file; needs --calibration.
    #[arg(long, requires = "calibration")]
    pub model: Option<PathBuf>,
    /// KS level and stream level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.2)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.1)]
    pub set_alpha: f64,
    #[arg(long)]
    pub csv_out: Option<PathBuf>,
}
