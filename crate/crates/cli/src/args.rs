use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "kumiw", version, about = "Kumaraswamy inverse Weibull toolkit: evaluation, simulation, fitting and survival curves")]
pub struct Cli {
    /// TOML file with default settings; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Directory receiving the output files (default: current directory).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate pdf, cdf, survival and hazard on a grid (dist.csv).
    Dist(DistArgs),
    /// Draw a random sample, optionally with uniform random censoring (sample.csv).
    Sample(SampleArgs),
    /// Maximum likelihood fit with Wald intervals and likelihood ratio tests.
    FitMle(FitMleArgs),
    /// Bayesian fit by Metropolis-within-Gibbs (summary.csv, chain.csv).
    FitBayes(FitBayesArgs),
    /// Kaplan-Meier curve of a dataset (km.csv).
    Km(KmArgs),
    /// Kaplan-Meier versus a fitted model (km.csv, compare.csv, qq.csv).
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Default)]
pub struct ParamArgs {
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SeedArg {
    /// Random seed; falls back to KUMIW_SEED, then the config file, then 42.
    #[arg(long, env = "KUMIW_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// CSV file with a time column and an optional 0/1 status column.
    #[arg(long, conflicts_with = "stand_in")]
    pub data: Option<PathBuf>,

    /// Use the bundled synthetic 69-subject dataset instead of a file.
    #[arg(long)]
    pub stand_in: bool,

    #[arg(long, default_value = "time")]
    pub time_col: String,

    /// Status column (1 = event, 0 = censored). When the file has no such
    /// column every row is an event.
    #[arg(long, default_value = "status")]
    pub status_col: String,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[command(flatten)]
    pub params: ParamArgs,

    /// Explicit evaluation points, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["t_min", "t_max", "points"])]
    pub t: Option<Vec<f64>>,

    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub params: ParamArgs,

    #[arg(long)]
    pub n: usize,

    /// Target proportion of censored observations; adds a status column.
    #[arg(long)]
    pub censor_rate: Option<f64>,

    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct FitMleArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Sub-model to fit: kumiw, kumir, kumie, iw, ir or ie.
    #[arg(long, default_value = "kumiw")]
    pub model: String,

    /// Null sub-model for a likelihood ratio test against the full model; repeatable.
    #[arg(long = "lr-null")]
    pub lr_null: Vec<String>,

    /// Confidence level of the Wald intervals.
    #[arg(long)]
    pub level: Option<f64>,

    /// Starting values as b,c,beta.
    #[arg(long, value_delimiter = ',')]
    pub init: Option<Vec<f64>>,

    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,

    /// Run a simulation study with this many replicates instead of fitting a dataset.
    #[arg(long, conflicts_with_all = ["data", "stand_in"])]
    pub replicates: Option<usize>,

    /// Sample size per replicate of the simulation study.
    #[arg(long, requires = "replicates")]
    pub n: Option<usize>,

    /// Censoring proportion per replicate of the simulation study.
    #[arg(long, requires = "replicates")]
    pub censor_rate: Option<f64>,

    /// Generating parameters of the simulation study.
    #[command(flatten)]
    pub truth: ParamArgs,

    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct FitBayesArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Gamma prior on b as shape,rate.
    #[arg(long, value_delimiter = ',')]
    pub prior_b: Option<Vec<f64>>,
    /// Gamma prior on c as shape,rate.
    #[arg(long, value_delimiter = ',')]
    pub prior_c: Option<Vec<f64>>,
    /// Gamma prior on beta as shape,rate.
    #[arg(long, value_delimiter = ',')]
    pub prior_beta: Option<Vec<f64>>,

    #[arg(long)]
    pub n_iter: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,

    /// Initial random-walk standard deviation on the log scale, for all three parameters.
    #[arg(long)]
    pub proposal_scale: Option<f64>,

    /// Keep the proposal scales fixed during burn-in.
    #[arg(long)]
    pub no_adapt: bool,

    /// Starting values as b,c,beta.
    #[arg(long, value_delimiter = ',')]
    pub init: Option<Vec<f64>>,

    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,

    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct KmArgs {
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Model parameters; when absent they come from --params-file or an MLE fit.
    #[command(flatten)]
    pub params: ParamArgs,

    /// JSON report written by fit-mle, or a JSON/TOML file with keys b, c, beta.
    #[arg(long)]
    pub params_file: Option<PathBuf>,
}
