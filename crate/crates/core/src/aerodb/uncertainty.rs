//! Per-point standard deviations assigned to each data source.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::AeroError;

/// Lower bound on wind-tunnel uncertainty.
pub const WT_FLOOR: f64 = 1e-4;

/// `max{0.1·|C(0)|, 0.002·‖x‖₂·range(C)}`, with `x` in degrees.
pub fn avl_uncertainty(c_at_origin: f64, c_range: f64, x: &[f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    (0.1 * c_at_origin.abs()).max(0.002 * norm * c_range)
}

/// `max{1e-4, 0.05·range(C)}`.
pub fn wt_uncertainty(c_range: f64) -> f64 {
    WT_FLOOR.max(0.05 * c_range)
}

/// Same floor-and-fraction rule applied to the range within a single
/// deflection slice `δ = Δ`.
pub fn wt_control_uncertainty(c_range_at_delta: f64) -> f64 {
    wt_uncertainty(c_range_at_delta)
}

/// Flight condition at which a coefficient was measured (degrees).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightCondition {
    pub alpha: f64,
    pub beta: f64,
}

/// Change in a coefficient due to a deflected surface, relative to the clean
/// airframe at the same flight condition.
pub fn control_increment(
    deflected: (FlightCondition, f64),
    baseline: (FlightCondition, f64),
) -> Result<f64, AeroError> {
    if deflected.0 != baseline.0 {
        return Err(AeroError::ConditionMismatch {
            deflected: (deflected.0.alpha, deflected.0.beta),
            baseline: (baseline.0.alpha, baseline.0.beta),
        });
    }
    Ok(deflected.1 - baseline.1)
}

/// How the noise standard deviation of a dataset is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UncertaintyModel {
    /// Taken from the `sigma` column.
    Explicit,
    Avl,
    Wt,
}

fn range(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

/// Standard deviation for every row of a table.
///
/// For the AVL rule `C(0)` is the output at the row closest to the origin of
/// the input space. For the wind-tunnel rule on a control increment
/// (`delta_column` set) the range is taken within each deflection slice.
pub fn assign(
    model: UncertaintyModel,
    inputs: &DMatrix<f64>,
    outputs: &DVector<f64>,
    delta_column: Option<usize>,
    explicit: Option<&[f64]>,
) -> Result<Vec<f64>, AeroError> {
    let n = outputs.len();
    match model {
        UncertaintyModel::Explicit => {
            let sd = explicit.ok_or(AeroError::MissingSigma)?;
            Ok(sd.to_vec())
        }
        UncertaintyModel::Avl => {
            if n == 0 {
                return Ok(Vec::new());
            }
            let norm = |i: usize| inputs.row(i).iter().map(|v| v * v).sum::<f64>();
            let origin = (0..n)
                .min_by(|&a, &b| norm(a).total_cmp(&norm(b)))
                .expect("nonempty");
            let c0 = outputs[origin];
            let r = range(outputs.iter().cloned());
            Ok((0..n)
                .map(|i| avl_uncertainty(c0, r, inputs.row(i).iter().cloned().collect::<Vec<_>>().as_slice()))
                .collect())
        }
        UncertaintyModel::Wt => match delta_column {
            None => {
                let sd = wt_uncertainty(range(outputs.iter().cloned()));
                Ok(vec![sd; n])
            }
            Some(d) => Ok((0..n)
                .map(|i| {
                    let delta = inputs[(i, d)];
                    let slice = (0..n).filter(|&j| inputs[(j, d)] == delta).map(|j| outputs[j]);
                    wt_control_uncertainty(range(slice))
                })
                .collect()),
        },
    }
}
