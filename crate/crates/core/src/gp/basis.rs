use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Monomial trend basis: a constant plus `x_d^k` for every input dimension `d`
/// and `k = 1..=degree`. No cross terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub degree: usize,
}

impl Default for BasisSpec {
    fn default() -> Self {
        Self { degree: 1 }
    }
}

impl BasisSpec {
    pub const CONSTANT: BasisSpec = BasisSpec { degree: 0 };

    pub fn new(degree: usize) -> Self {
        Self { degree }
    }

    /// Number of basis functions `p` for `m`-dimensional inputs.
    pub fn dimension(&self, m: usize) -> usize {
        1 + m * self.degree
    }

    pub fn eval_point(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dimension(x.len()));
        out.push(1.0);
        for k in 1..=self.degree {
            out.extend(x.iter().map(|v| v.powi(k as i32)));
        }
        out
    }

    /// Design matrix with one row per input point (n×p).
    pub fn design(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let m = x.ncols();
        let p = self.dimension(m);
        let mut h = DMatrix::zeros(x.nrows(), p);
        for i in 0..x.nrows() {
            h[(i, 0)] = 1.0;
            for k in 1..=self.degree {
                for d in 0..m {
                    h[(i, (k - 1) * m + d + 1)] = x[(i, d)].powi(k as i32);
                }
            }
        }
        h
    }
}
