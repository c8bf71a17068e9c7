//! Probabilistic aerodynamics and controls databases: one surrogate per
//! coefficient, source-dependent uncertainty rules, deterministic sampling
//! onto lookup tables, and composition of control increments.

mod database;
mod grid;
mod ingest;
mod keys;
mod uncertainty;

use thiserror::Error;

use crate::gp::GpError;

pub use database::{
    sample_database, DatabaseModel, DatabaseRecord, DatabaseSample, Deflections, MassProperties, PreparedDatabase,
    ReferenceGeometry,
};
pub use grid::{tensor_points, AxisSpec, GridSpec, GridSurface, Lookup};
pub use ingest::{ingest_file, ingest_table};
pub use keys::{simulator_keys, Coefficient, CoefficientKey, Input, Surface};
pub use uncertainty::{
    assign as assign_uncertainty, avl_uncertainty, control_increment, wt_control_uncertainty, wt_uncertainty,
    FlightCondition, UncertaintyModel, WT_FLOOR,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AeroError {
    #[error("unknown coefficient key `{0}`")]
    UnknownKey(String),
    #[error("database is missing coefficient `{0}`")]
    MissingKey(String),
    #[error("increment baseline taken at a different condition: deflected (α, β) = {deflected:?}, baseline {baseline:?}")]
    ConditionMismatch { deflected: (f64, f64), baseline: (f64, f64) },
    #[error("explicit uncertainty requested but the table has no `sigma` column")]
    MissingSigma,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("coefficient `{key}` takes {expected} inputs, got {found}")]
    Signature { key: String, expected: usize, found: usize },
    #[error("table for `{key}` must have input columns {expected}, found {found}")]
    Columns { key: String, expected: String, found: String },
    #[error("increment `{key}` is nonzero ({value}) at zero deflection in row {row}")]
    NonzeroBaselineIncrement { key: String, row: usize, value: f64 },
    #[error("coefficient `{key}`: {source}")]
    Model {
        key: String,
        #[source]
        source: GpError,
    },
    #[error("posterior covariance of `{0}` could not be factorized")]
    NotFactorizable(String),
}

impl AeroError {
    pub(crate) fn model(key: &CoefficientKey, source: GpError) -> Self {
        AeroError::Model {
            key: key.to_string(),
            source,
        }
    }
}
