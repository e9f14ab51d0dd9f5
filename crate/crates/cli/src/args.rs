use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "pitman",
    version,
    about = "Exact laws, sampling, fitting, prediction and convergence-rate experiments for PD(alpha, theta) partitions",
    after_help = "Exit codes: 0 success, 1 numeric or input failure, 2 usage error, 3 failed --check.\n\
                  PITMAN_TABLE_LIMIT overrides the coefficient-table size cap."
)]
pub struct Cli {
    /// Master seed; replicate i always uses stream i of this seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (defaults to the available parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output format. Tables default to csv, single objects to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate an exact probability mass function.
    Pmf(PmfArgs),
    /// Draw replicates from one of the samplers.
    Sample(SampleArgs),
    /// Fit (alpha, theta) to a file of species labels by maximum likelihood.
    Fit(FitArgs),
    /// Kolmogorov distances over a size grid with a log-log slope fit.
    Rate(RateArgs),
    /// Predict the number of new species in m further draws.
    Predict(PredictArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Law {
    /// Number of blocks K_n.
    Blocks,
    /// Sampling formula for block-size multiplicities.
    Esf,
    /// Conditional block count given the mixing variable z.
    Rho,
    /// Posterior number of new species among m further draws.
    Unseen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    Noncentral,
    Mixture,
}

#[derive(Debug, Args)]
pub struct PmfArgs {
    #[arg(long, value_enum)]
    pub law: Law,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Sample size (observed sample size for --law unseen).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub j: Option<usize>,
    /// Evaluation route for --law unseen.
    #[arg(long, value_enum, default_value_t = Route::Mixture)]
    pub route: Route,
    /// Comma-separated block sizes of one partition for --law esf.
    #[arg(long, value_delimiter = ',', conflicts_with = "input")]
    pub blocks: Option<Vec<usize>>,
    /// Species-label file whose partition is evaluated for --law esf.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub input_format: Option<InputKind>,
    /// The CSV input has a header row.
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleWhat {
    /// Random partition of n by sequential seating.
    Partition,
    /// Mittag-Leffler variate S_{alpha,theta}.
    Ml,
    /// Posterior alpha-diversity given n observations with j species.
    PosteriorDiversity,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub what: SampleWhat,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    Csv,
    Jsonl,
    Plain,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Input layout; inferred from the extension (.csv, .jsonl) when omitted, else plain.
    #[arg(long, value_enum)]
    pub input_format: Option<InputKind>,
    /// The CSV input has a header row.
    #[arg(long)]
    pub header: bool,
    /// Box margin epsilon.
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1e4)]
    pub theta_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RateKind {
    Prior,
    Posterior,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[arg(long, value_enum)]
    pub mode: RateKind,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    /// Observed sample size (posterior mode).
    #[arg(long)]
    pub n: Option<usize>,
    /// Observed number of species (posterior mode).
    #[arg(long)]
    pub j: Option<usize>,
    /// Comma-separated, strictly increasing sizes.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    /// Exit with code 3 unless the slope lies within 0.15 of -alpha and the
    /// scaled column varies by at most a factor of 10.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Exact,
    Asymptotic,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub j: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    /// Credible level of the equal-tail interval.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Monte Carlo draws in asymptotic mode.
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    /// Largest m evaluated exactly.
    #[arg(long, default_value_t = pitman_core::inference::DEFAULT_EXACT_LIMIT)]
    pub exact_limit: usize,
}
