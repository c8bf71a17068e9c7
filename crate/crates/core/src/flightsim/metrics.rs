//! Control-saturation success metrics.

use serde::{Deserialize, Serialize};

use super::config::DeflectionLimits;
use super::SimError;

/// `(lim − max|δ|)/lim`; negative when the demand exceeds the limit.
pub fn saturation_metric(max_abs: f64, limit: f64) -> Result<f64, SimError> {
    if !(limit > 0.0 && limit.is_finite()) {
        return Err(SimError::InvalidLimit(limit));
    }
    Ok((limit - max_abs) / limit)
}

/// Largest magnitude in a history.
pub fn peak(history: &[f64]) -> Result<f64, SimError> {
    if history.is_empty() {
        return Err(SimError::EmptyHistory);
    }
    Ok(history.iter().fold(0.0, |m: f64, v| m.max(v.abs())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Elevator.
    pub pitch: f64,
    /// Aileron.
    pub roll: f64,
    /// Rudder.
    pub yaw: f64,
}

impl Metrics {
    /// The maneuver succeeds when every metric is strictly positive.
    pub fn success(&self) -> bool {
        self.pitch > 0.0 && self.roll > 0.0 && self.yaw > 0.0
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.pitch, self.roll, self.yaw]
    }
}

pub fn success_metrics(
    aileron: &[f64],
    elevator: &[f64],
    rudder: &[f64],
    limits: &DeflectionLimits,
) -> Result<Metrics, SimError> {
    Ok(Metrics {
        pitch: saturation_metric(peak(elevator)?, limits.elevator)?,
        roll: saturation_metric(peak(aileron)?, limits.aileron)?,
        yaw: saturation_metric(peak(rudder)?, limits.rudder)?,
    })
}
