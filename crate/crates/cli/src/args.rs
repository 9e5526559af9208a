//! Command-line definitions.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "qhd", version, about = "Two-mode homodyne tomography of a delocalized single photon")]
pub struct Cli {
    /// Worker threads (default: QHD_THREADS, else all cores).
    #[arg(long, global = true, env = "QHD_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate homodyne records from a state.
    Simulate(SimulateArgs),
    /// Reconstruct a density matrix from records.
    Reconstruct(ReconstructArgs),
    /// Entanglement and Bell analysis.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Run the full simulate / reconstruct / analyze pipeline.
    Reproduce(ReproduceArgs),
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn positive_efficiency(s: &str) -> Result<f64, String> {
    let v = unit_interval(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err("efficiency must be positive".into())
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be finite and non-negative"))
    }
}

fn positive_real(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be finite and positive"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Bin,
}

#[derive(Debug, Args, Serialize)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["eta", "state"])))]
pub struct SimulateArgs {
    /// Efficiency of the lossy delocalized photon to sample.
    #[arg(long, value_parser = unit_interval)]
    pub eta: Option<f64>,
    /// Density-matrix JSON file to sample instead.
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// Number of records.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// Relative-phase steps per cycle.
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..))]
    pub phase_steps: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Fock cutoff for the --eta model.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(2..=16))]
    pub dim: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Pf,
    Ml,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlocksArg {
    GlobalPhase,
}

/// `ibt`, `ibt:auto` or `ibt:<eta>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Correction {
    IbtAuto,
    Ibt(f64),
}

impl FromStr for Correction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None if s == "ibt" => Ok(Self::IbtAuto),
            Some(("ibt", "auto")) => Ok(Self::IbtAuto),
            Some(("ibt", v)) => positive_efficiency(v).map(Self::Ibt),
            _ => Err(format!("unknown correction '{s}' (expected ibt, ibt:auto or ibt:<eta>)")),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ReconstructArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(2..=16))]
    pub dim: u64,
    /// Detector efficiency folded into the ML POVM.
    #[arg(long, value_parser = positive_efficiency)]
    pub eta: Option<f64>,
    /// Loss correction applied to the estimate.
    #[arg(long, value_parser = Correction::from_str)]
    pub correct: Option<Correction>,
    /// Project the corrected matrix back onto the PSD cone.
    #[arg(long)]
    pub clip: bool,
    #[arg(long, value_enum)]
    pub blocks: Option<BlocksArg>,
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iters: u64,
    #[arg(long, default_value_t = 1e-8, value_parser = positive_real)]
    pub tol: f64,
    /// Bin records for ML with this quadrature width instead of using them one by one.
    #[arg(long, value_parser = positive_real)]
    pub bin_width: Option<f64>,
    /// Phase bins used with --bin-width.
    #[arg(long, default_value_t = 24, value_parser = clap::value_parser!(u64).range(1..))]
    pub phase_bins: u64,
    /// Bootstrap resamples for error bars (0 disables).
    #[arg(long, default_value_t = 0)]
    pub bootstrap: u64,
    #[arg(long, default_value_t = 1)]
    pub bootstrap_seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 0.5, value_parser = positive_real)]
    pub j_max: f64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub steps: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Logarithmic negativity of a density matrix.
    Negativity(NegativityArgs),
    /// Bell scan along α1 = α2 = √J of a density matrix.
    Bell(BellArgs),
    /// Closed-form Bell scan of the lossy delocalized photon.
    BellTheory(BellTheoryArgs),
    /// Smallest efficiency that still violates the Bell bound.
    Threshold(ThresholdArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct NegativityArgs {
    #[arg(long)]
    pub rho: PathBuf,
    /// Records for a bootstrap error bar.
    #[arg(long)]
    pub records: Option<PathBuf>,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(2..))]
    pub bootstrap: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BellArgs {
    #[arg(long)]
    pub rho: PathBuf,
    #[command(flatten)]
    pub scan: ScanArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct BellTheoryArgs {
    #[arg(long, value_parser = unit_interval)]
    pub eta: f64,
    #[command(flatten)]
    pub scan: ScanArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ReproduceArgs {
    #[arg(long, default_value = "reproduce_out")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1000..))]
    pub n: u64,
    #[arg(long, default_value_t = 20_240_611)]
    pub seed: u64,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(2..))]
    pub bootstrap: u64,
    /// Iteration cap for the ML stage.
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iters: u64,
    #[arg(long, default_value_t = 0.05, value_parser = non_negative)]
    pub bin_width: f64,
}
