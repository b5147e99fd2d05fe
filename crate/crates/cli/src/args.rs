use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "shiftbench", version, about = "Multi-frame sub-pixel shift estimation and benchmarking")]
#[command(args_override_self = true)]
pub struct Cli {
    /// key=value file supplying defaults for the subcommand's flags
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic stack from a truth image
    Synth(SynthArgs),
    /// Estimate shifts of a frame directory
    Estimate(EstimateArgs),
    /// Run a Monte-Carlo sweep from a spec file
    Bench(BenchArgs),
    /// Align a burst on a patch and average the full frames
    AlignBurst(AlignArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrajectoryArg {
    Iid,
    Drift,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodArg {
    Mle,
    Map,
    Constrained,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimizerArg {
    Ccd,
    Vp,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitArg {
    Pairwise,
    Random,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Image path or built-in scene `dead-leaves:<seed>[:<H>x<W>]`
    #[arg(long)]
    pub truth: String,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    /// Target SNR; omit (with no --sigma2) for noiseless frames
    #[arg(long, allow_hyphen_values = true, conflicts_with = "sigma2")]
    pub snr_db: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long, value_enum, default_value_t = TrajectoryArg::Iid)]
    pub trajectory: TrajectoryArg,
    #[arg(long, default_value_t = 2.0)]
    pub half_range: f64,
    #[arg(long, default_value_t = 0.5)]
    pub speed_mean: f64,
    #[arg(long, default_value_t = 0.1)]
    pub speed_std: f64,
    #[arg(long, default_value_t = 0.2)]
    pub angle_std: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Skip band-limit preparation of the truth
    #[arg(long)]
    pub raw_truth: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Mle)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = OptimizerArg::Ccd)]
    pub optimizer: OptimizerArg,
    #[arg(long, value_enum, default_value_t = InitArg::Pairwise)]
    pub init: InitArg,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_outer_iters: u64,
    #[arg(long, default_value_t = 1e-4)]
    pub shift_tol: f64,
    #[arg(long, default_value_t = 10)]
    pub newton_iters: u64,
    #[arg(long, default_value_t = 2.0)]
    pub random_init_half_range: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Channel used for estimation in multi-channel frames
    #[arg(long, default_value_t = 0)]
    pub channel: usize,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[arg(long)]
    pub frames: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Known noise variance; estimated from the frames when omitted
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Manifest with true shifts; adds an MSE line to the report
    #[arg(long)]
    pub truth_manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a gnuplot script for the CSV
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Run trials on the calling thread only
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Args, Debug)]
pub struct AlignArgs {
    #[arg(long)]
    pub frames: PathBuf,
    /// Patch left column; centered when omitted
    #[arg(long)]
    pub patch_x: Option<usize>,
    /// Patch top row; centered when omitted
    #[arg(long)]
    pub patch_y: Option<usize>,
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u64).range(2..))]
    pub patch_size: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
}
