//! Tensor-product evaluation grids and multilinear lookup tables.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::keys::{CoefficientKey, Input, Surface};
use super::AeroError;

/// Grid axis given either as explicit values or as an inclusive range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisSpec {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl AxisSpec {
    pub fn values(&self) -> Result<Vec<f64>, AeroError> {
        let v = match self {
            AxisSpec::Values(v) => v.clone(),
            AxisSpec::Range { start, stop, step } => {
                if !(*step > 0.0) || stop < start {
                    return Err(AeroError::InvalidGrid(format!(
                        "range {start}..{stop} with step {step}"
                    )));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|i| start + i as f64 * step).collect()
            }
        };
        check_axis(&v)?;
        Ok(v)
    }
}

fn check_axis(v: &[f64]) -> Result<(), AeroError> {
    if v.is_empty() {
        return Err(AeroError::InvalidGrid("empty axis".into()));
    }
    if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AeroError::InvalidGrid(format!("axis must be strictly increasing: {v:?}")));
    }
    Ok(())
}

/// Evaluation grid used when drawing database samples. Deflection axes not
/// listed here default to the distinct deflections present in the training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub alpha: AxisSpec,
    pub beta: AxisSpec,
    #[serde(default)]
    pub delta: BTreeMap<Surface, AxisSpec>,
}

impl Default for GridSpec {
    /// α every 1° over −4°..25°, β every 4° over −20°..20°.
    fn default() -> Self {
        Self {
            alpha: AxisSpec::Range {
                start: -4.0,
                stop: 25.0,
                step: 1.0,
            },
            beta: AxisSpec::Range {
                start: -20.0,
                stop: 20.0,
                step: 4.0,
            },
            delta: BTreeMap::new(),
        }
    }
}

impl GridSpec {
    /// Axes for one coefficient, in signature order.
    pub fn axes_for(&self, key: &CoefficientKey, data_deltas: &[f64]) -> Result<Vec<Vec<f64>>, AeroError> {
        key.signature()
            .iter()
            .map(|input| match input {
                Input::Alpha => self.alpha.values(),
                Input::Beta => self.beta.values(),
                Input::Delta => {
                    let surface = key.surface().expect("delta input implies a surface");
                    match self.delta.get(&surface) {
                        Some(axis) => axis.values(),
                        None => {
                            let mut v = data_deltas.to_vec();
                            v.sort_by(f64::total_cmp);
                            v.dedup();
                            check_axis(&v)?;
                            Ok(v)
                        }
                    }
                }
            })
            .collect()
    }
}

/// All grid nodes, one per row, last axis varying fastest.
pub fn tensor_points(axes: &[Vec<f64>]) -> DMatrix<f64> {
    let n: usize = axes.iter().map(Vec::len).product();
    let d = axes.len();
    let mut out = DMatrix::zeros(n, d);
    for row in 0..n {
        let mut rem = row;
        for j in (0..d).rev() {
            let len = axes[j].len();
            out[(row, j)] = axes[j][rem % len];
            rem /= len;
        }
    }
    out
}

/// Interpolated value and whether any coordinate fell outside the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lookup {
    pub value: f64,
    pub extrapolated: bool,
}

/// Values on a tensor grid with multilinear interpolation inside and linear
/// extrapolation from the boundary cell outside.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSurface {
    axes: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl GridSurface {
    pub fn new(axes: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self, AeroError> {
        for a in &axes {
            check_axis(a)?;
        }
        let n: usize = axes.iter().map(Vec::len).product();
        if values.len() != n {
            return Err(AeroError::InvalidGrid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                n
            )));
        }
        Ok(Self { axes, values })
    }

    /// Tabulates `f` on the grid.
    pub fn from_fn(axes: Vec<Vec<f64>>, f: impl Fn(&[f64]) -> f64) -> Result<Self, AeroError> {
        let pts = tensor_points(&axes);
        let values = (0..pts.nrows())
            .map(|i| f(pts.row(i).iter().cloned().collect::<Vec<_>>().as_slice()))
            .collect();
        Self::new(axes, values)
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn eval(&self, x: &[f64]) -> Lookup {
        debug_assert_eq!(x.len(), self.axes.len());
        let d = self.axes.len();
        let mut lower = [0usize; 4];
        let mut frac = [0.0f64; 4];
        let mut extrapolated = false;
        assert!(d <= 4, "grid dimension above 4");
        for j in 0..d {
            let a = &self.axes[j];
            let v = x[j];
            if v < a[0] || v > a[a.len() - 1] {
                extrapolated = true;
            }
            if a.len() == 1 {
                lower[j] = 0;
                frac[j] = 0.0;
                continue;
            }
            let i = match a.partition_point(|g| *g <= v) {
                0 => 0,
                p => (p - 1).min(a.len() - 2),
            };
            lower[j] = i;
            frac[j] = (v - a[i]) / (a[i + 1] - a[i]);
        }
        let mut value = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut idx = 0usize;
            for j in 0..d {
                let up = (corner >> j) & 1 == 1;
                let len = self.axes[j].len();
                if len == 1 {
                    if up {
                        w = 0.0;
                    }
                    idx *= len;
                    continue;
                }
                w *= if up { frac[j] } else { 1.0 - frac[j] };
                idx = idx * len + lower[j] + usize::from(up);
            }
            if w != 0.0 {
                value += w * self.values[idx];
            }
        }
        Lookup { value, extrapolated }
    }
}
