//! Open-loop simulation of the roll-capability bank reversal.
//!
//! The bank-angle history is prescribed; the rotational accelerations it
//! implies are converted to required moments, and at every step the three
//! primary surfaces are solved for so that aerodynamic plus engine moments
//! match. No feedback is involved.

pub mod allocate;
pub mod config;
pub mod dynamics;
pub mod metrics;
pub mod trajectory;
pub mod trim;

use thiserror::Error;

use crate::aerodb::{AeroError, DatabaseSample};

pub use allocate::{allocate_controls, Allocation, MomentModel};
pub use config::{DeflectionLimits, EngineConfig, EngineStatus, ManeuverSpec, SimConfig, G};
pub use dynamics::{moments_from_accelerations, required_accelerations, RequiredAccelerations};
pub use metrics::{saturation_metric, success_metrics, Metrics};
pub use trajectory::{build_trajectory, from_phases, quintic_peak_acceleration, Phase, Trajectory};
pub use trim::{trim, TrimState};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Aero(#[from] AeroError),
    #[error("no trim found (alpha {alpha:.4}, elevator {elevator:.4}, residual {residual:.3e})")]
    NoTrim { alpha: f64, elevator: f64, residual: f64 },
    #[error("control allocation did not converge at step {step} (t = {time} s, residual {residual:.3e})")]
    AllocationFailed { step: usize, time: f64, residual: f64 },
    #[error("empty deflection history")]
    EmptyHistory,
    #[error("deflection limit must be positive, got {0}")]
    InvalidLimit(f64),
}

/// Histories and metrics of one simulated maneuver.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub time: Vec<f64>,
    /// Bank angle (deg).
    pub bank: Vec<f64>,
    pub aileron: Vec<f64>,
    pub elevator: Vec<f64>,
    pub rudder: Vec<f64>,
    pub accelerations: RequiredAccelerations,
    /// Moment-balance residual per step (N·m).
    pub residual: Vec<f64>,
    pub trim: TrimState,
    pub metrics: Metrics,
    /// Some table was read outside its grid.
    pub extrapolated: bool,
}

impl SimResult {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().cloned().fold(0.0, f64::max)
    }

    /// Columns of [`SimResult::history_rows`].
    pub const HISTORY_HEADERS: [&'static str; 11] = [
        "time", "bank", "aileron", "elevator", "rudder", "p_dot", "q_dot", "r_dot", "L", "M", "N",
    ];

    pub fn history_rows(&self) -> Vec<Vec<f64>> {
        let a = &self.accelerations;
        (0..self.time.len())
            .map(|k| {
                vec![
                    self.time[k],
                    self.bank[k],
                    self.aileron[k],
                    self.elevator[k],
                    self.rudder[k],
                    a.p_dot[k],
                    a.q_dot[k],
                    a.r_dot[k],
                    a.moments[k][0],
                    a.moments[k][1],
                    a.moments[k][2],
                ]
            })
            .collect()
    }
}

/// Trim, trajectory, required accelerations, allocation and metrics for one
/// database sample.
pub fn simulate(sample: &DatabaseSample, config: &SimConfig) -> Result<SimResult, SimError> {
    config.validate()?;
    sample.check_complete()?;
    let v = config.maneuver.airspeed;
    let trim = trim(sample, v, config.density)?;
    let traj = build_trajectory(&config.maneuver)?;
    let acc = required_accelerations(&traj, trim.alpha.to_radians(), v, &sample.mass);
    let model = MomentModel::new(sample, trim.alpha, v, config.density)?;
    let alloc = allocate_controls(&acc, &model, &config.engines, &trim)?;
    let metrics = success_metrics(&alloc.aileron, &alloc.elevator, &alloc.rudder, &config.limits)?;
    Ok(SimResult {
        bank: traj.phi.iter().map(|p| p.to_degrees()).collect(),
        time: traj.time,
        aileron: alloc.aileron,
        elevator: alloc.elevator,
        rudder: alloc.rudder,
        accelerations: acc,
        residual: alloc.residual,
        extrapolated: alloc.extrapolated || trim.extrapolated,
        trim,
        metrics,
    })
}
