use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Multi-fidelity aerodynamic databases, turbulence-model and grid
/// uncertainty, and Monte Carlo certification analysis.
///
/// Verbosity is controlled by the MFDB_LOG environment variable
/// (error, warn, info, debug, trace).
#[derive(Debug, Parser)]
#[command(name = "mfdb", version)]
pub struct Cli {
    /// Write summaries as JSON instead of `key = value` lines.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a surrogate or a whole database from a TOML manifest.
    Fit(FitArgs),
    /// Posterior mean and ±2σ band on a grid of points.
    Predict(PredictArgs),
    /// Joint posterior draws on a grid of points.
    Sample(SampleArgs),
    /// Eigenspace perturbations of a Reynolds stress field.
    Perturb(PerturbArgs),
    /// Grid convergence index from three systematically refined grids.
    Gci(GciArgs),
    /// Fly the bank-reversal maneuver on one database realization.
    Simulate(SimulateArgs),
    /// Monte Carlo propagation of database uncertainty through the maneuver.
    Montecarlo(MonteCarloArgs),
    /// Deflection limit reaching a target success rate.
    Design(DesignArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Manifest describing levels, data files and optimizer settings.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Where to write the fitted model (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

/// Model and query grid shared by `predict` and `sample`.
#[derive(Debug, Args)]
pub struct GridArgs {
    /// Fitted model file.
    #[arg(long)]
    pub model: PathBuf,
    /// CSV of query points; columns must match the model inputs.
    #[arg(long)]
    pub grid: PathBuf,
    /// Coefficient to evaluate when the model is a database.
    #[arg(long)]
    pub key: Option<String>,
    /// Fidelity level to evaluate (defaults to the highest).
    #[arg(long)]
    pub level: Option<usize>,
    /// Output CSV (standard output when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Number of draws.
    #[arg(long)]
    pub n: usize,
    /// Seed of the standard-normal draws.
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Target {
    #[value(name = "1c")]
    One,
    #[value(name = "2c")]
    Two,
    #[value(name = "3c")]
    Three,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Alignment {
    Max,
    Min,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    /// CSV with columns R11,R22,R33,R12,R13,R23 and optionally k; other
    /// columns are copied through.
    #[arg(long)]
    pub field: PathBuf,
    /// Directory receiving one `<target>_<alignment>.csv` per perturbation.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Fraction of the distance to the limiting state, in [0, 1].
    #[arg(long, default_value_t = mfdb::turbulence::DEFAULT_RELAXATION)]
    pub relaxation: f64,
    /// Only this limiting state (all five combinations when omitted).
    #[arg(long, requires = "eigenvectors")]
    pub target: Option<Target>,
    #[arg(long, requires = "target")]
    pub eigenvectors: Option<Alignment>,
}

#[derive(Debug, Args)]
pub struct GciArgs {
    /// Node counts, fine to coarse.
    #[arg(long, value_delimiter = ',', conflicts_with = "h", requires = "dim")]
    pub nodes: Option<Vec<u64>>,
    /// Representative cell sizes, fine to coarse.
    #[arg(long, value_delimiter = ',')]
    pub h: Option<Vec<f64>>,
    /// Solution values, fine to coarse.
    #[arg(long, value_delimiter = ',', required = true)]
    pub phi: Vec<f64>,
    /// Spatial dimension of the grids (2 or 3).
    #[arg(long)]
    pub dim: Option<u8>,
}

/// Database and simulation configuration.
#[derive(Debug, Args)]
pub struct SimInputs {
    /// Fitted database (JSON from `fit`) or a database manifest (`.toml`),
    /// which is fitted first.
    #[arg(long)]
    pub db: PathBuf,
    /// Maneuver, engine and limit settings (TOML).
    #[arg(long)]
    pub maneuver: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub inputs: SimInputs,
    /// Seed of the database draw.
    #[arg(long, required_unless_present = "mean", conflicts_with = "mean")]
    pub seed: Option<u64>,
    /// Fly the posterior-mean database instead of a draw.
    #[arg(long)]
    pub mean: bool,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    #[command(flatten)]
    pub inputs: SimInputs,
    /// Number of database realizations.
    #[arg(long)]
    pub samples: usize,
    /// Master seed.
    #[arg(long)]
    pub seed: u64,
    /// Worker threads (all cores when omitted); results do not depend on it.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// CDF file written by `montecarlo`.
    #[arg(long)]
    pub cdf: PathBuf,
    /// Target success rate in [0, 1].
    #[arg(long)]
    pub x: f64,
    /// Current deflection limit (deg).
    #[arg(long)]
    pub limit: f64,
}
