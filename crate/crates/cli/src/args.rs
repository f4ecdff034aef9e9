use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::io::Format;

/// Time-varying long-memory estimation with local wavelet scalograms.
#[derive(Debug, Parser)]
#[command(name = "locmem", version, args_override_self = true)]
pub struct Cli {
    /// Flat `key = value` file of flag defaults; command-line flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Worker threads; all cores when unset.
    #[arg(long, global = true, env = "LOCMEM_THREADS", value_name = "N")]
    pub threads: Option<usize>,

    /// Output format for tables.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a tvARFIMA or tvFGN path, one value per line.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Local scalogram of a series in long format (u, j, sigma2).
    #[command(args_override_self = true)]
    Scalogram(ScalogramArgs),
    /// Estimate d(u) with confidence intervals.
    #[command(args_override_self = true)]
    Estimate(EstimateArgs),
    /// Tabulate K(d), Sigma and the limit variance over a d grid.
    #[command(args_override_self = true)]
    Asymptotics(AsymptoticsArgs),
    /// Rate-balancing choice of the lowest scale and bandwidth.
    #[command(args_override_self = true)]
    Advise(AdviseArgs),
    /// Monte Carlo study on the cosine-ramp tvARFIMA(1,d,0) model.
    #[command(args_override_self = true)]
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Arfima,
    Fgn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightsKind {
    /// Rectangle kernel of width b (custom profile with --kernel-taps).
    #[value(alias = "rectangle")]
    Kernel,
    /// Exponential forgetting with time constant b T_j.
    Recursive,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::Arfima)]
    pub model: ModelKind,

    /// tvARFIMA memory curve: a number, `cosine`, `cosine:START:AMPLITUDE`
    /// or `piecewise:U=V,U=V,...`.
    #[arg(long, default_value = "cosine")]
    pub memory: String,

    /// tvFGN Hurst curve, same syntax as --memory.
    #[arg(long, default_value = "0.7")]
    pub hurst: String,

    /// tvARFIMA AR coefficient curves separated by `;`, or `none`.
    #[arg(long, default_value = "0.8")]
    pub ar: String,

    /// tvARFIMA MA coefficient curves separated by `;`, or `none`.
    #[arg(long, default_value = "none")]
    pub ma: String,

    /// tvARFIMA innovation scale curve.
    #[arg(long, default_value = "1")]
    pub sigma: String,

    /// Integration order p (tvARFIMA).
    #[arg(long, default_value_t = 0)]
    pub differencing: usize,

    /// Series length T.
    #[arg(long, default_value_t = 4096)]
    pub len: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Past lags kept in the moving-average representation.
    #[arg(long, default_value_t = locmem::sim::DEFAULT_TRUNCATION)]
    pub truncation: usize,

    /// Output file; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Bandwidth b in (0, 1].
    #[arg(long, default_value_t = 0.25)]
    pub bandwidth: f64,

    #[arg(long, value_enum, default_value_t = WeightsKind::Kernel)]
    pub weights: WeightsKind,

    /// Custom symmetric kernel profile sampled on [-1/2, 1/2], comma-separated.
    #[arg(long, value_name = "VALUES")]
    pub kernel_taps: Option<String>,

    /// Number of grid intervals: u = i / n for i = 0..=n.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,

    /// `haar` or `dbN`.
    #[arg(long, default_value = "db2")]
    pub wavelet: String,

    /// Write the per-scale detail filter taps (j, t, h) to this file.
    #[arg(long, value_name = "PATH")]
    pub dump_taps: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScalogramArgs {
    /// Input series, one value per line with an optional header.
    pub input: PathBuf,

    /// Scales as an inclusive range `A..B` or `L:ELL`.
    #[arg(long, default_value = "1..5")]
    pub scales: String,

    #[command(flatten)]
    pub window: WindowArgs,

    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Input series, one value per line with an optional header.
    pub input: PathBuf,

    /// Regression scales `L:ELL` (or `L..L+ELL`).
    #[arg(long, default_value = "2:2")]
    pub scales: String,

    #[command(flatten)]
    pub window: WindowArgs,

    /// Confidence level of the intervals.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,

    /// Custom regression weights w_0..w_ELL, comma-separated.
    #[arg(long, value_name = "VALUES")]
    pub regression_weights: Option<String>,

    /// Differencing order p of the analysed model.
    #[arg(long, default_value_t = 0)]
    pub differencing: usize,

    /// Skip confidence intervals.
    #[arg(long)]
    pub no_ci: bool,

    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AsymptoticsArgs {
    /// `LO:HI:STEP` or a comma-separated list of d values.
    #[arg(long, default_value = "0:0.4:0.1")]
    pub d_grid: String,

    /// Number of regression scales minus one.
    #[arg(long, default_value_t = 2)]
    pub ell: usize,

    #[arg(long, value_enum, default_value_t = WeightsKind::Kernel)]
    pub weights: WeightsKind,

    /// Bandwidth used when a custom kernel needs numerical weight limits.
    #[arg(long, default_value_t = 0.25)]
    pub bandwidth: f64,

    #[arg(long, value_name = "VALUES")]
    pub kernel_taps: Option<String>,

    #[arg(long, default_value = "db2")]
    pub wavelet: String,

    #[arg(long, default_value_t = 0)]
    pub differencing: usize,

    #[arg(long, value_name = "VALUES")]
    pub regression_weights: Option<String>,

    /// Lattice truncation |l| <= N of the limiting cross spectrum.
    #[arg(long)]
    pub lattice_terms: Option<usize>,

    /// Relative tolerance of the truncation certificates.
    #[arg(long)]
    pub tolerance: Option<f64>,

    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AdviseArgs {
    /// Series length T.
    #[arg(long)]
    pub len: usize,

    /// Prior guess of d.
    #[arg(long, default_value_t = 0.25)]
    pub d_prior: f64,

    /// Smoothness exponent beta in (0, 2].
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,

    #[arg(long, default_value_t = 0)]
    pub differencing: usize,

    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeChoice {
    Both,
    Kernel,
    Recursive,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Number of Monte Carlo paths.
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,

    #[arg(long, default_value_t = 1)]
    pub first_seed: u64,

    #[arg(long, default_value_t = 4096)]
    pub len: usize,

    #[arg(long, default_value_t = 0.25)]
    pub bandwidth: f64,

    #[arg(long, default_value_t = 60)]
    pub grid: usize,

    #[arg(long, default_value_t = 0.95)]
    pub level: f64,

    #[arg(long, value_enum, default_value_t = SchemeChoice::Both)]
    pub weights: SchemeChoice,

    /// Directory receiving the report files.
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}
