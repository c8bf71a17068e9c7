use thiserror::Error;

use crate::aerodb::AeroError;
use crate::flightsim::SimError;
use crate::gci::GciError;
use crate::gp::GpError;
use crate::io::IoError;
use crate::montecarlo::McError;
use crate::turbulence::TurbulenceError;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad configuration or arguments.
    Usage,
    /// Missing, malformed or inconsistent input data.
    Data,
    /// A numerical procedure failed.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{path}: {msg}")]
    Config { path: String, msg: String },
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error(transparent)]
    Turbulence(#[from] TurbulenceError),
    #[error(transparent)]
    Gci(#[from] GciError),
    #[error(transparent)]
    Aero(#[from] AeroError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    MonteCarlo(#[from] McError),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io(_) => ErrorKind::Data,
            Error::Config { .. } => ErrorKind::Usage,
            Error::Gp(e) => gp_kind(e),
            Error::Turbulence(e) => match e {
                TurbulenceError::InvalidRelaxation(_) => ErrorKind::Usage,
                _ => ErrorKind::Data,
            },
            Error::Gci(e) => match e {
                GciError::InvalidExponent(_) | GciError::InvalidNodeCount | GciError::NotRefined(_) => ErrorKind::Usage,
                GciError::NonConvergent { .. } => ErrorKind::Numerical,
                _ => ErrorKind::Data,
            },
            Error::Aero(e) => match e {
                AeroError::Model { source, .. } => gp_kind(source),
                AeroError::NotFactorizable(_) => ErrorKind::Numerical,
                AeroError::InvalidGrid(_) => ErrorKind::Usage,
                _ => ErrorKind::Data,
            },
            Error::Sim(e) => match e {
                SimError::Config(_) => ErrorKind::Usage,
                SimError::Aero(_) => ErrorKind::Data,
                _ => ErrorKind::Numerical,
            },
            Error::MonteCarlo(e) => match e {
                McError::Empty | McError::TooFew { .. } => ErrorKind::Data,
                _ => ErrorKind::Usage,
            },
        }
    }

    /// Short tag naming the failing stage.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Io(_) => "io",
            Error::Config { .. } => "config",
            Error::Gp(_) => "gp",
            Error::Turbulence(_) => "turbulence",
            Error::Gci(_) => "gci",
            Error::Aero(_) => "database",
            Error::Sim(_) => "simulation",
            Error::MonteCarlo(_) => "montecarlo",
        }
    }
}

fn gp_kind(e: &GpError) -> ErrorKind {
    match e {
        GpError::NotPositiveDefinite | GpError::RankDeficient | GpError::NotFactorizable => ErrorKind::Numerical,
        _ => ErrorKind::Data,
    }
}
