//! Single-fidelity Gaussian process regression with explicit basis functions
//! and per-point Gaussian noise.

mod basis;
mod dataset;
mod kernel;
mod model;
mod optimize;

pub use basis::BasisSpec;
pub use dataset::Dataset;
pub use kernel::{kernel_eval, kernel_gram, kernel_matrix, KernelParams};
pub use model::{log_marginal_likelihood, GpModel, GpRecord};
pub use optimize::OptimizerConfig;

pub(crate) use model::{draw_rows, gls, training_covariance, with_beta};
pub(crate) use optimize::{maximize, SearchSpace};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpError {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("underdetermined basis: {n} observations for {p} basis functions")]
    Underdetermined { n: usize, p: usize },
    #[error("covariance is not positive definite even after jitter")]
    NotPositiveDefinite,
    #[error("regression design matrix is rank deficient")]
    RankDeficient,
    #[error("predictive covariance could not be factorized for sampling")]
    NotFactorizable,
    #[error("fidelity level {level} has {n} observations but needs at least {needed}")]
    DegenerateLevel { level: usize, n: usize, needed: usize },
    #[error("fidelity levels must be fitted bottom-up: expected level {expected}, got {found}")]
    LevelOrder { expected: usize, found: usize },
    #[error("model has {levels} fidelity levels, level {requested} requested")]
    UnknownLevel { requested: usize, levels: usize },
}
