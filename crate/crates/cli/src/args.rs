use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "compnmf", version, about = "Compressive Bayesian Poisson NMF")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Simulate a count matrix with known signatures and loadings
    Simulate(SimulateArgs),
    /// Fit a factorization to a count matrix
    Fit(FitArgs),
    /// Compare a fit with the truth of a simulated dataset
    Compare(CompareArgs),
    /// Effective sample sizes of a fit or of a trace file
    Diagnose(DiagnoseArgs),
    /// Tabulate the posterior of a relevance weight against the average count
    Elbow(ElbowArgs),
    /// Re-run a command from its manifest and check the outputs
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Fit(_) => "fit",
            Command::Compare(_) => "compare",
            Command::Diagnose(_) => "diagnose",
            Command::Elbow(_) => "elbow",
            Command::Replay(_) => "replay",
        }
    }

    pub fn out_dir(&self) -> &PathBuf {
        match self {
            Command::Simulate(a) => &a.out,
            Command::Fit(a) => &a.out,
            Command::Compare(a) => &a.out,
            Command::Diagnose(a) => &a.out,
            Command::Elbow(a) => &a.out,
            Command::Replay(a) => &a.out,
        }
    }

    pub fn set_out_dir(&mut self, out: PathBuf) {
        match self {
            Command::Simulate(a) => a.out = out,
            Command::Fit(a) => a.out = out,
            Command::Compare(a) => a.out = out,
            Command::Diagnose(a) => a.out = out,
            Command::Elbow(a) => a.out = out,
            Command::Replay(a) => a.out = out,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeArg {
    Sbs,
    Indel,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "sbs")]
    pub regime: RegimeArg,
    /// Overdispersion (0 gives Poisson counts)
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    #[arg(long = "J", default_value_t = 100)]
    pub j: usize,
    /// Number of random signatures added to the four catalog ones
    #[arg(long = "K-new", default_value_t = 2)]
    pub k_new: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dirichlet parameter of the random signatures (regime default if unset)
    #[arg(long)]
    pub dirichlet_new: Option<f64>,
    /// Shape of the per-signature loading scale (regime default if unset)
    #[arg(long)]
    pub w_shape: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Compressive,
    FixedStrength,
    Cusp,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// Counts CSV (channels × samples)
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long = "K", default_value_t = 20)]
    pub k: usize,
    #[arg(long, default_value_t = 0.001)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    #[arg(long, default_value_t = 4000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Factor k is active when its posterior mean relevance exceeds C·epsilon
    #[arg(long, default_value_t = 5.0)]
    pub threshold_c: f64,
    #[arg(long, value_enum, default_value = "compressive")]
    pub method: Method,
    #[arg(long)]
    pub a0: Option<f64>,
    #[arg(long)]
    pub b0: Option<f64>,
    /// Catalog CSV used as informative prior centres
    #[arg(long)]
    pub cosmic_file: Option<PathBuf>,
    /// De novo signatures next to the catalog ones (informative mode, default 10)
    #[arg(long)]
    pub k_new: Option<usize>,
    /// Loading shape of catalog-anchored signatures (informative mode, default a)
    #[arg(long)]
    pub b: Option<f64>,
    /// Median prior cosine targeted when choosing each catalog concentration
    #[arg(long)]
    pub beta_target: Option<f64>,
    /// Dirichlet draws per grid point when choosing concentrations
    #[arg(long, default_value_t = 1000)]
    pub beta_draws: usize,
    /// Skip the burn-in relabelling onto catalog slots
    #[arg(long)]
    pub no_rematch: bool,
    /// Catalog CSV used only to label the estimated signatures
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Spike location (cusp)
    #[arg(long, default_value_t = 0.01)]
    pub mu_inf: f64,
    /// Stick-breaking concentration (cusp)
    #[arg(long, default_value_t = 5.0)]
    pub alpha_pi: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CompareArgs {
    /// Output directory of `fit`
    #[arg(long)]
    pub fit: PathBuf,
    /// Output directory of `simulate`
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.9)]
    pub cutoff: f64,
    /// Comma-separated cutoffs for an F1 curve
    #[arg(long, value_delimiter = ',')]
    pub cutoff_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DiagnoseArgs {
    /// Output directory of `fit`
    #[arg(long, conflicts_with = "trace", required_unless_present = "trace")]
    pub fit: Option<PathBuf>,
    /// Trace CSV (first column iteration, one column per parameter)
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElbowMode {
    Compressive,
    FixedStrength,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ElbowArgs {
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 0.001)]
    pub epsilon: f64,
    #[arg(long = "J-list", value_delimiter = ',', default_value = "10,100,1000")]
    pub j_list: Vec<usize>,
    #[arg(long, default_value_t = 10.0)]
    pub ybar_max: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "compressive")]
    pub mode: ElbowMode,
    #[arg(long, default_value_t = 11.0)]
    pub a0: f64,
    #[arg(long, default_value_t = 0.01)]
    pub b0: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory for the re-run outputs
    #[arg(long)]
    pub out: PathBuf,
}
