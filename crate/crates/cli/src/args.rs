use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "extremogram",
    version,
    about = "Extremal serial dependence: extremograms, bootstrap and permutation bands, GARCH tools"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Univariate extremogram with bootstrap and permutation bands.
    Extremogram(EstimateArgs),
    /// Cross-extremogram from the first series to the second.
    Cross(EstimateArgs),
    /// Trivariate extremogram over three series.
    Tri(TriArgs),
    /// Return-times histogram with geometric reference and bootstrap bands.
    Returntimes(EstimateArgs),
    /// Simulate a GARCH(1,1) or stochastic volatility path.
    Simulate(SimulateArgs),
    /// Fit GARCH(1,1) by quasi maximum likelihood.
    FitGarch(FitArgs),
    /// Devolatilized residuals of a GARCH(1,1) fit.
    Devol(FitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReturnsMode {
    Raw,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TailArg {
    Upper,
    Lower,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BandMethodArg {
    Centered,
    Quantile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Joint,
    Channels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TriVariant {
    /// P(Y or Z extreme at t+h | X extreme at t)
    Target,
    /// P(Z extreme at t+h | X or Y extreme at t)
    Source,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Garch,
    Sv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// CSV file; repeat for multi-series commands. `-` reads standard input.
    #[arg(long = "input", short = 'i', required = true)]
    pub inputs: Vec<String>,

    /// Value column by header name or zero-based index; one per input, or
    /// several for a single input. Defaults to the last column.
    #[arg(long = "column", short = 'c')]
    pub columns: Vec<String>,

    /// Label column (e.g. dates). Defaults to the first column when a file
    /// has more than one.
    #[arg(long)]
    pub date_column: Option<String>,

    /// Treat the first row as data even if it does not parse as numbers.
    #[arg(long)]
    pub no_header: bool,

    #[arg(long, value_enum, default_value_t = ReturnsMode::Raw)]
    pub returns: ReturnsMode,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file, written atomically. Standard output when omitted.
    #[arg(long, short = 'o')]
    pub output: Option<String>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long, value_enum, default_value_t = TailArg::Upper)]
    pub tail: TailArg,

    /// Quantile level of the threshold, measured into the chosen tail.
    #[arg(long, default_value_t = 0.96)]
    pub q: f64,

    /// Fixed threshold instead of a quantile level.
    #[arg(long)]
    pub threshold: Option<f64>,

    #[arg(long, default_value_t = 40)]
    pub lags: usize,

    /// Mean block length 1/p of the stationary bootstrap.
    #[arg(long, default_value_t = 100.0)]
    pub block_size: f64,

    #[arg(long, default_value_t = 10_000)]
    pub replicates: usize,

    /// Skip the bootstrap bands.
    #[arg(long)]
    pub no_bootstrap: bool,

    /// Random permutations for the significance bands; 0 disables them.
    #[arg(long, default_value_t = 99)]
    pub permutations: usize,

    #[arg(long, env = "EXTREMOGRAM_SEED", default_value_t = 0)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = BandMethodArg::Centered)]
    pub band_method: BandMethodArg,

    #[arg(long, value_enum, default_value_t = SchemeArg::Joint)]
    pub scheme: SchemeArg,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TriArgs {
    #[arg(long, value_enum, default_value_t = TriVariant::Target)]
    pub variant: TriVariant,

    #[command(flatten)]
    pub estimate: EstimateArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: Model,

    #[arg(long, default_value_t = 100_000)]
    pub n: usize,

    #[arg(long, default_value_t = 2000)]
    pub burn_in: usize,

    #[arg(long, env = "EXTREMOGRAM_SEED", default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 0.1)]
    pub omega: f64,

    #[arg(long, default_value_t = 0.14)]
    pub alpha: f64,

    #[arg(long, default_value_t = 0.84)]
    pub beta: f64,

    #[arg(long, default_value_t = 0.9)]
    pub phi: f64,

    /// Standard deviation of the log-volatility noise.
    #[arg(long, default_value_t = 1.0)]
    pub vol_sd: f64,

    /// Student-t degrees of freedom (default 4 for garch, 2.6 for sv).
    #[arg(long)]
    pub dof: Option<f64>,

    /// Gaussian instead of Student-t innovations.
    #[arg(long, conflicts_with = "dof")]
    pub gaussian: bool,

    /// Scale t innovations to unit variance (default: on for garch, off for sv).
    #[arg(long)]
    pub standardize: Option<bool>,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}
