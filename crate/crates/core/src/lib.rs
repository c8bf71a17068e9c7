//! Probabilistic multi-fidelity aerodynamic databases, RANS model-form
//! uncertainty, grid-convergence error bars, and Monte Carlo propagation of
//! database uncertainty through a roll-capability certification maneuver.

pub mod aerodb;
pub mod bundle;
mod error;
pub mod flightsim;
pub mod gci;
pub mod gp;
pub mod io;
pub mod linalg;
pub mod manifest;
pub mod mfgp;
pub mod montecarlo;
pub mod seed;
pub mod synthetic;
pub mod turbulence;

pub use error::{Error, ErrorKind};
