use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::GpError;

/// Observations of one fidelity level: inputs (n×m), outputs and per-point noise standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetRecord", into = "DatasetRecord")]
pub struct Dataset {
    inputs: DMatrix<f64>,
    outputs: DVector<f64>,
    noise_sd: DVector<f64>,
}

impl Dataset {
    pub fn new(
        inputs: DMatrix<f64>,
        outputs: DVector<f64>,
        noise_sd: DVector<f64>,
    ) -> Result<Self, GpError> {
        let n = inputs.nrows();
        if outputs.len() != n {
            return Err(GpError::DimensionMismatch {
                what: "outputs",
                expected: n,
                found: outputs.len(),
            });
        }
        if noise_sd.len() != n {
            return Err(GpError::DimensionMismatch {
                what: "noise_sd",
                expected: n,
                found: noise_sd.len(),
            });
        }
        if n > 0 && inputs.ncols() == 0 {
            return Err(GpError::InvalidData("inputs have zero columns".into()));
        }
        if inputs.iter().chain(outputs.iter()).any(|v| !v.is_finite()) {
            return Err(GpError::InvalidData("non-finite input or output value".into()));
        }
        if noise_sd.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(GpError::InvalidData(
                "noise standard deviations must be finite and nonnegative".into(),
            ));
        }
        Ok(Self {
            inputs,
            outputs,
            noise_sd,
        })
    }

    /// Builds a dataset from row-major input points.
    pub fn from_rows(rows: &[Vec<f64>], outputs: &[f64], noise_sd: &[f64]) -> Result<Self, GpError> {
        let m = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(GpError::DimensionMismatch {
                what: "input row",
                expected: m,
                found: bad.len(),
            });
        }
        let inputs = DMatrix::from_fn(rows.len(), m, |i, j| rows[i][j]);
        Self::new(
            inputs,
            DVector::from_column_slice(outputs),
            DVector::from_column_slice(noise_sd),
        )
    }

    /// One-dimensional convenience constructor.
    pub fn from_1d(x: &[f64], y: &[f64], noise_sd: &[f64]) -> Result<Self, GpError> {
        let inputs = DMatrix::from_column_slice(x.len(), 1, x);
        Self::new(
            inputs,
            DVector::from_column_slice(y),
            DVector::from_column_slice(noise_sd),
        )
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn inputs(&self) -> &DMatrix<f64> {
        &self.inputs
    }

    pub fn outputs(&self) -> &DVector<f64> {
        &self.outputs
    }

    pub fn noise_sd(&self) -> &DVector<f64> {
        &self.noise_sd
    }

    /// Noise covariance diagonal, σ².
    pub fn noise_variance(&self) -> DVector<f64> {
        self.noise_sd.map(|s| s * s)
    }

    /// Range of the outputs (max − min), zero for empty data.
    pub fn output_range(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.outputs.max() - self.outputs.min()
    }
}

#[derive(Serialize, Deserialize)]
struct DatasetRecord {
    inputs: Vec<Vec<f64>>,
    outputs: Vec<f64>,
    noise_sd: Vec<f64>,
}

impl From<Dataset> for DatasetRecord {
    fn from(d: Dataset) -> Self {
        let inputs = d
            .inputs
            .row_iter()
            .map(|r| r.iter().cloned().collect())
            .collect();
        Self {
            inputs,
            outputs: d.outputs.iter().cloned().collect(),
            noise_sd: d.noise_sd.iter().cloned().collect(),
        }
    }
}

impl TryFrom<DatasetRecord> for Dataset {
    type Error = GpError;

    fn try_from(r: DatasetRecord) -> Result<Self, Self::Error> {
        Dataset::from_rows(&r.inputs, &r.outputs, &r.noise_sd)
    }
}
