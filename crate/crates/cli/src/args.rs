use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "bpc", version, about = "Bayesian Bradley-Terry and Davidson paired-comparison models")]
pub struct Cli {
    /// Worker threads for parallel chains (default: all cores)
    #[arg(long, global = true, env = "BPC_THREADS")]
    pub threads: Option<usize>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
#[allow(clippy::large_enum_variant)] // parsed once per process
pub enum Command {
    /// Fit a model to a contest file and write a fit archive
    Fit(FitArgs),
    /// Parameter estimates, pairwise probabilities and ranks
    Summary(SummaryArgs),
    /// Posterior rank distribution of the players
    Ranks(ArchiveArgs),
    /// Posterior probability of each player beating every other
    Probabilities(ArchiveArgs),
    /// Predictive distribution of a new contest
    Predict(PredictArgs),
    /// Convergence checks: treedepth, divergences, E-BFMI, ESS, split R-hat
    Diagnose(DiagnoseArgs),
    /// Widely applicable information criterion
    Waic(CriterionArgs),
    /// PSIS leave-one-out cross-validation
    Loo(CriterionArgs),
    /// Rank several fits of the same data by expected predictive accuracy
    Compare(CompareArgs),
    /// Long-format draws (parameter, chain, draw, value) for plotting
    Plotdata(PlotdataArgs),
}

#[derive(Args, Debug)]
pub struct DataArgs {
    /// Delimited contest file with a header row
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "player0")]
    pub player0: String,
    #[arg(long, default_value = "player1")]
    pub player1: String,
    /// Result column: 0 = player0 wins, 1 = player1 wins, 2 = tie
    #[arg(long, default_value = "y", conflicts_with_all = ["score0", "score1"])]
    pub result: String,
    /// Score column of player0 (use with --score1 instead of --result)
    #[arg(long, requires = "score1")]
    pub score0: Option<String>,
    #[arg(long, requires = "score0")]
    pub score1: Option<String>,
    /// Subject id column (random effects, subject predictors)
    #[arg(long)]
    pub subject: Option<String>,
    /// Column with the 0/1 order-effect indicator (default: 1 for every row)
    #[arg(long)]
    pub order_column: Option<String>,
    /// Subject-level predictor column (repeatable)
    #[arg(long = "covariate")]
    pub covariates: Vec<String>,
    /// Player predictor table, one row per player
    #[arg(long)]
    pub player_covariates: Option<PathBuf>,
    #[arg(long, default_value = "player")]
    pub player_column: String,
    #[arg(long, value_parser = ["none", "random", "remove"], default_value = "none")]
    pub solve_ties: String,
    /// Seed for --solve-ties random
    #[arg(long, default_value_t = 0)]
    pub tie_seed: u64,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Model string: bt or davidson, optionally followed by -ordereffect,
    /// -generalized, -U, -S (e.g. davidson-generalized-U)
    #[arg(long, default_value = "bt")]
    pub model: String,
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    #[arg(long, default_value_t = 1000)]
    pub warmup: usize,
    #[arg(long, default_value_t = 2000)]
    pub draws: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.8)]
    pub target_accept: f64,
    #[arg(long, default_value_t = 10)]
    pub max_treedepth: u32,
    /// Prior standard deviation of each lambda (default: sqrt 3); the other
    /// --prior-*-sd flags work the same way for their parameter
    #[arg(long)]
    pub prior_lambda_sd: Option<f64>,
    #[arg(long)]
    pub prior_nu_sd: Option<f64>,
    #[arg(long)]
    pub prior_gamma_sd: Option<f64>,
    #[arg(long)]
    pub prior_beta_sd: Option<f64>,
    #[arg(long = "prior-S-sd")]
    pub prior_s_sd: Option<f64>,
    #[arg(long = "prior-U-sd")]
    pub prior_u_sd: Option<f64>,
    /// Where to write the fit archive
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ArchiveArgs {
    pub archive: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub decimals: usize,
}

#[derive(Args, Debug)]
pub struct SummaryArgs {
    #[command(flatten)]
    pub archive: ArchiveArgs,
    #[arg(long, value_parser = ["hpd", "equal-tailed"], default_value = "hpd")]
    pub interval: String,
    #[arg(long, default_value_t = 0.95)]
    pub mass: f64,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    pub archive: PathBuf,
    #[arg(long)]
    pub player0: String,
    #[arg(long)]
    pub player1: String,
    /// Subject covariate in original units, NAME=VALUE (repeatable)
    #[arg(long = "covariate")]
    pub covariates: Vec<String>,
    /// Subject covariate in standard deviations from the mean, NAME=VALUE
    #[arg(long = "std-covariate")]
    pub std_covariates: Vec<String>,
    #[arg(long, default_value_t = 1)]
    pub order_indicator: u8,
    /// Posterior draws to use, evenly spaced (0 = all)
    #[arg(long, default_value_t = 0)]
    pub draws_per_row: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit one row per posterior draw instead of the mean probabilities
    #[arg(long)]
    pub per_draw: bool,
    #[arg(long, default_value_t = 2)]
    pub decimals: usize,
}

#[derive(Args, Debug)]
pub struct DiagnoseArgs {
    pub archive: PathBuf,
    #[arg(long, default_value_t = 1.01)]
    pub max_rhat: f64,
    #[arg(long, default_value_t = 200.0)]
    pub min_ess: f64,
    #[arg(long, default_value_t = 0.2)]
    pub min_ebfmi: f64,
}

#[derive(Args, Debug)]
pub struct CriterionArgs {
    pub archive: PathBuf,
    /// Contest file to use instead of the one recorded at fit time
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(required = true, num_args = 1..)]
    pub archives: Vec<PathBuf>,
    /// waic or loo
    #[arg(long, default_value = "loo")]
    pub criterion: String,
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PlotdataArgs {
    pub archive: PathBuf,
    /// Restrict to these parameters (repeatable)
    #[arg(long = "parameter")]
    pub parameters: Vec<String>,
}
