use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::GpError;

/// Squared-exponential kernel hyperparameters.
///
/// `length_scales` are squared-length quantities: the kernel divides the
/// squared distance by `2·l_d`, so `l_d = ℓ²` in the more common parameterization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub signal_variance: f64,
    pub length_scales: Vec<f64>,
}

impl KernelParams {
    pub fn new(signal_variance: f64, length_scales: Vec<f64>) -> Result<Self, GpError> {
        let p = Self {
            signal_variance,
            length_scales,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), GpError> {
        if !(self.signal_variance.is_finite() && self.signal_variance > 0.0) {
            return Err(GpError::InvalidHyperparameter(format!(
                "signal variance must be positive, got {}",
                self.signal_variance
            )));
        }
        if let Some(l) = self
            .length_scales
            .iter()
            .find(|l| !(l.is_finite() && **l > 0.0))
        {
            return Err(GpError::InvalidHyperparameter(format!(
                "length scales must be positive, got {l}"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.length_scales.len()
    }

    /// Inverse of the optimizer's log-space vector `[ln σ_f², ln l_1, …, ln l_m]`.
    pub(crate) fn from_log(theta: &[f64]) -> Self {
        Self {
            signal_variance: theta[0].exp(),
            length_scales: theta[1..].iter().map(|t| t.exp()).collect(),
        }
    }
}

/// `σ_f² exp(−Σ_d (a_d − b_d)² / (2 l_d))`.
pub fn kernel_eval(a: &[f64], b: &[f64], params: &KernelParams) -> Result<f64, GpError> {
    params.validate()?;
    if a.len() != b.len() || a.len() != params.dim() {
        return Err(GpError::DimensionMismatch {
            what: "kernel arguments",
            expected: params.dim(),
            found: if a.len() != params.dim() { a.len() } else { b.len() },
        });
    }
    Ok(eval_unchecked(a.iter().cloned(), b.iter().cloned(), params))
}

#[inline]
fn eval_unchecked(
    a: impl Iterator<Item = f64>,
    b: impl Iterator<Item = f64>,
    params: &KernelParams,
) -> f64 {
    let r2: f64 = a
        .zip(b)
        .zip(&params.length_scales)
        .map(|((x, y), l)| (x - y) * (x - y) / (2.0 * l))
        .sum();
    params.signal_variance * (-r2).exp()
}

/// Cross-covariance matrix between the rows of `a` and the rows of `b`.
pub fn kernel_matrix(a: &DMatrix<f64>, b: &DMatrix<f64>, params: &KernelParams) -> DMatrix<f64> {
    debug_assert_eq!(a.ncols(), params.dim());
    debug_assert_eq!(b.ncols(), params.dim());
    DMatrix::from_fn(a.nrows(), b.nrows(), |i, j| {
        eval_unchecked(a.row(i).iter().cloned(), b.row(j).iter().cloned(), params)
    })
}

/// Symmetric kernel matrix of a point set with itself.
pub fn kernel_gram(a: &DMatrix<f64>, params: &KernelParams) -> DMatrix<f64> {
    let n = a.nrows();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = params.signal_variance;
        for j in 0..i {
            let v = eval_unchecked(a.row(i).iter().cloned(), a.row(j).iter().cloned(), params);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}
