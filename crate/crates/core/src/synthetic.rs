//! A laterally symmetric analytic aircraft used for testing, calibration and
//! the bundled example data. Angles in degrees.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::aerodb::{
    simulator_keys, AxisSpec, Coefficient, CoefficientKey, DatabaseModel, DatabaseSample, GridSpec, GridSurface,
    Input, MassProperties, ReferenceGeometry, Surface,
};
use crate::gp::{BasisSpec, Dataset, GpError, OptimizerConfig};
use crate::io::Table;
use crate::mfgp::{LevelSpec, MfgpModel};
use crate::Error;

/// Low-fidelity member of the analytic pair on `[0, 1]`.
pub fn f_lf(x: f64) -> f64 {
    0.5 * (6.0 * x - 2.0).powi(2) * (12.0 * x - 4.0).sin() + 10.0 * (x - 0.5) - 5.0
}

/// High-fidelity member of the analytic pair on `[0, 1]`.
pub fn f_hf(x: f64) -> f64 {
    2.0 * f_lf(x) - 20.0 * x + 20.0 + (10.0 * (5.0 * x).cos()).sin()
}

/// High-fidelity inputs of the bundled two-level example.
pub const HF_POINTS: [f64; 4] = [0.0, 0.4, 0.6, 1.0];

/// `n` evenly spaced points on `[0, 1]`.
pub fn unit_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// Exact value of any simulator table at `(α, β, δ)`.
pub fn truth(key: &CoefficientKey, alpha: f64, beta: f64, delta: f64) -> f64 {
    use Coefficient::*;
    let (a, b, d) = (alpha, beta, delta);
    match (key.coefficient(), key.surface()) {
        (Lift, None) => 0.30 + 0.09 * a - 0.0006 * a * a - 0.0002 * b * b,
        (Drag, None) => 0.025 + 0.0004 * a * a + 0.0002 * b * b,
        (SideForce, None) => -0.012 * b,
        (Rolling, None) => -0.0015 * b - 0.00005 * a * b,
        (Pitching, None) => 0.05 - 0.012 * a,
        (Yawing, None) => 0.0018 * b,
        (PitchDamping, None) => -25.0 - 0.2 * a,
        (RollDamping, None) => -0.45 + 0.004 * a,
        (RollDueToYawRate, None) => 0.10 + 0.01 * a,
        (YawDueToRollRate, None) => -0.03 - 0.002 * a,
        (YawDamping, None) => -0.20,
        (Rolling, Some(Surface::Aileron)) => (0.0016 * d - 2e-7 * d * d * d) * (1.0 - 0.008 * a) * (1.0 - 0.0004 * b * b),
        (Pitching, Some(Surface::Aileron)) => -2e-5 * d * d,
        (Yawing, Some(Surface::Aileron)) => -0.00008 * d * (1.0 + 0.02 * a),
        (Pitching, Some(Surface::Elevator)) => -0.025 * d + 0.0002 * a * d,
        (Rolling | Yawing, Some(Surface::Elevator)) => 0.0,
        (Rolling, Some(Surface::Rudder)) => 0.0003 * d,
        (Pitching, Some(Surface::Rudder)) => -1e-5 * d * d,
        (Yawing, Some(Surface::Rudder)) => -0.0015 * d * (1.0 - 0.005 * a),
        _ => 0.0,
    }
}

fn range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    AxisSpec::Range { start, stop, step }.values().expect("valid literal range")
}

/// Deflection axis of the dense truth tables.
pub fn truth_deltas(surface: Surface) -> Vec<f64> {
    match surface {
        Surface::Rudder => range(-35.0, 35.0, 5.0),
        _ => range(-30.0, 30.0, 5.0),
    }
}

fn axes(key: &CoefficientKey, alpha: &[f64], beta: &[f64], delta: &[f64]) -> Vec<Vec<f64>> {
    key.signature()
        .iter()
        .map(|i| match i {
            Input::Alpha => alpha.to_vec(),
            Input::Beta => beta.to_vec(),
            Input::Delta => delta.to_vec(),
        })
        .collect()
}

/// The analytic aircraft tabulated on α = −4..25 (1°), β = −20..20 (4°) and
/// 5° deflection steps, with default geometry and mass.
pub fn truth_sample() -> DatabaseSample {
    let alpha = range(-4.0, 25.0, 1.0);
    let beta = range(-20.0, 20.0, 4.0);
    let surfaces = simulator_keys()
        .into_iter()
        .map(|key| {
            let deltas = key.surface().map(truth_deltas).unwrap_or_default();
            let ax = axes(&key, &alpha, &beta, &deltas);
            let s = GridSurface::from_fn(ax, |x| {
                let (mut a, mut b, mut d) = (0.0, 0.0, 0.0);
                for (v, i) in x.iter().zip(key.signature()) {
                    match i {
                        Input::Alpha => a = *v,
                        Input::Beta => b = *v,
                        Input::Delta => d = *v,
                    }
                }
                truth(&key, a, b, d)
            })
            .expect("valid axes");
            (key, s)
        })
        .collect();
    DatabaseSample::from_surfaces(surfaces, ReferenceGeometry::default(), MassProperties::default())
        .expect("signatures match")
}

/// Sparse training layout for a surrogate database of the analytic aircraft.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPlan {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub delta: BTreeMap<Surface, Vec<f64>>,
    /// Observation standard deviation as a fraction of each table's range.
    pub noise_fraction: f64,
    /// Lower bound on the observation standard deviation.
    pub noise_floor: f64,
}

impl Default for TrainingPlan {
    fn default() -> Self {
        let five = vec![-30.0, -15.0, 0.0, 15.0, 30.0];
        Self {
            alpha: range(-4.0, 24.0, 4.0),
            beta: vec![-20.0, 0.0, 20.0],
            delta: [Surface::Aileron, Surface::Elevator, Surface::Rudder]
                .into_iter()
                .map(|s| (s, five.clone()))
                .collect(),
            noise_fraction: 0.01,
            noise_floor: 1e-5,
        }
    }
}

impl TrainingPlan {
    /// Grid the fitted database is sampled on: α every 2°, β every 10°,
    /// deflections at the training values.
    pub fn sampling_grid(&self) -> GridSpec {
        GridSpec {
            alpha: AxisSpec::Range {
                start: self.alpha[0],
                stop: self.alpha[self.alpha.len() - 1],
                step: 2.0,
            },
            beta: AxisSpec::Range {
                start: self.beta[0],
                stop: self.beta[self.beta.len() - 1],
                step: 10.0,
            },
            delta: BTreeMap::new(),
        }
    }

    /// Exact observations of one table with a `sigma` column.
    pub fn table(&self, key: &CoefficientKey) -> Table {
        let deltas = key
            .surface()
            .map(|s| self.delta.get(&s).cloned().unwrap_or_else(|| truth_deltas(s)))
            .unwrap_or_default();
        let ax = axes(key, &self.alpha, &self.beta, &deltas);
        let pts = crate::aerodb::tensor_points(&ax);
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(pts.nrows());
        for i in 0..pts.nrows() {
            let x: Vec<f64> = pts.row(i).iter().cloned().collect();
            let get = |inp: Input| key.signature().iter().position(|s| *s == inp).map(|j| x[j]).unwrap_or(0.0);
            let y = truth(key, get(Input::Alpha), get(Input::Beta), get(Input::Delta));
            let mut row = x;
            row.push(y);
            rows.push(row);
        }
        let (lo, hi) = rows
            .iter()
            .map(|r| r[r.len() - 1])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        let sd = (self.noise_fraction * (hi - lo)).max(self.noise_floor);
        for r in &mut rows {
            r.push(sd);
        }
        let mut headers: Vec<String> = key.signature().iter().map(|i| i.column().to_string()).collect();
        headers.push("y".into());
        headers.push("sigma".into());
        Table { headers, rows }
    }

    pub fn dataset(&self, key: &CoefficientKey) -> Result<Dataset, GpError> {
        let t = self.table(key);
        let m = t.headers.len() - 2;
        let inputs: Vec<Vec<f64>> = t.rows.iter().map(|r| r[..m].to_vec()).collect();
        let y = t.column(m);
        let sd = t.column(m + 1);
        Dataset::from_rows(&inputs, &y, &sd)
    }

    /// Single-fidelity surrogate of every simulator table.
    pub fn fit(&self, optimizer: &OptimizerConfig) -> Result<DatabaseModel, Error> {
        let fitted: Result<Vec<(CoefficientKey, MfgpModel)>, Error> = simulator_keys()
            .into_par_iter()
            .map(|key| {
                let mut level = LevelSpec::new(1, self.dataset(&key)?);
                level.basis = BasisSpec::CONSTANT;
                level.optimizer = optimizer.clone();
                let model = MfgpModel::build(vec![level]).map_err(|e| crate::aerodb::AeroError::model(&key, e))?;
                Ok((key, model))
            })
            .collect();
        let mut db = DatabaseModel::new(ReferenceGeometry::default(), MassProperties::default(), self.sampling_grid());
        for (k, m) in fitted? {
            db.insert(k, m)?;
        }
        Ok(db)
    }
}
