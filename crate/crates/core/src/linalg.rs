//! Dense linear-algebra helpers shared by the regression modules.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

/// Smallest nonzero diagonal jitter, relative to the mean diagonal of the matrix.
pub const JITTER_START: f64 = 1e-12;
/// Smallest accepted squared pivot, relative to the mean diagonal.
const MIN_PIVOT: f64 = 1e-14;
/// Largest diagonal jitter tried before a factorization is declared failed.
pub const JITTER_MAX: f64 = 1e-6;

/// A Cholesky factor together with the diagonal jitter that was needed to obtain it.
#[derive(Debug, Clone)]
pub struct JitteredCholesky {
    pub factor: Cholesky<f64, Dyn>,
    pub jitter: f64,
}

impl JitteredCholesky {
    /// Factorizes `m` as is, then `m + jitter·I` with the jitter escalating by
    /// 10x from `JITTER_START·mean(diag)` to `JITTER_MAX·mean(diag)`. A factor
    /// is accepted only if every squared pivot exceeds `1e-14·mean(diag)`.
    /// Returns `None` if every attempt fails.
    pub fn new(m: &DMatrix<f64>) -> Option<Self> {
        let n = m.nrows();
        if n == 0 {
            return Cholesky::new(m.clone()).map(|factor| Self { factor, jitter: 0.0 });
        }
        let mean_diag = m.diagonal().mean();
        let scale = if mean_diag.is_finite() && mean_diag > 0.0 {
            mean_diag
        } else {
            1.0
        };
        let floor = MIN_PIVOT * scale;
        let mut rel = 0.0;
        while rel <= JITTER_MAX * (1.0 + 1e-9) {
            let jitter = rel * scale;
            let mut a = m.clone();
            for i in 0..n {
                a[(i, i)] += jitter;
            }
            if let Some(factor) = Cholesky::new(a) {
                if factor.l_dirty().diagonal().iter().all(|d| d.is_finite() && d * d >= floor) {
                    return Some(Self { factor, jitter });
                }
            }
            rel = if rel == 0.0 { JITTER_START } else { rel * 10.0 };
        }
        None
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self.factor.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.factor.solve(b)
    }

    pub fn solve_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        self.factor.solve(b)
    }

    /// Solves `L x = b` for the lower-triangular factor.
    pub fn solve_lower(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let l = self.factor.l();
        l.solve_lower_triangular(b)
            .expect("cholesky factor has a positive diagonal")
    }

    /// Solves `L z = b` for a single right-hand side.
    pub fn solve_lower_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        self.factor
            .l_dirty()
            .solve_lower_triangular(b)
            .expect("cholesky factor has a positive diagonal")
    }
}

/// Forces exact symmetry and clamps negative variances produced by cancellation.
pub fn symmetrize_clamp(cov: &mut DMatrix<f64>) {
    let n = cov.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
        if cov[(i, i)] < 0.0 {
            cov[(i, i)] = 0.0;
        }
    }
}

/// Lower square-root factor `L` with `L Lᵀ ≈ cov`.
///
/// Tries Cholesky with a tiny relative jitter first and falls back to a
/// symmetric eigendecomposition with negative eigenvalues clamped to zero.
/// A covariance whose diagonal is identically zero yields a zero factor.
pub fn psd_sqrt(cov: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = cov.nrows();
    let max_diag = cov.diagonal().iter().cloned().fold(0.0_f64, f64::max);
    if !max_diag.is_finite() {
        return None;
    }
    if max_diag <= 0.0 {
        return Some(DMatrix::zeros(n, n));
    }
    let mut rel = 1e-12;
    while rel <= 1e-8 {
        let mut a = cov.clone();
        for i in 0..n {
            a[(i, i)] += rel * max_diag;
        }
        if let Some(ch) = Cholesky::new(a) {
            return Some(ch.unpack());
        }
        rel *= 100.0;
    }
    let eig = SymmetricEigen::new(cov.clone());
    let mut q = eig.eigenvectors;
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        if !s.is_finite() {
            return None;
        }
        q.column_mut(j).scale_mut(s);
    }
    Some(q)
}

/// A multivariate normal ready for repeated draws: `mean + L·U`, `U ~ N(0, I)`.
#[derive(Debug, Clone)]
pub struct GaussianDraw {
    mean: DVector<f64>,
    factor: DMatrix<f64>,
    degenerate: bool,
}

impl GaussianDraw {
    pub fn new(mean: DVector<f64>, cov: &DMatrix<f64>) -> Option<Self> {
        let factor = psd_sqrt(cov)?;
        let degenerate = factor.iter().all(|v| *v == 0.0);
        Some(Self {
            mean,
            factor,
            degenerate,
        })
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let n = self.mean.len();
        // Draw U even for a degenerate factor so the stream position does not
        // depend on the posterior.
        let u = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        if self.degenerate {
            return self.mean.clone();
        }
        &self.mean + &self.factor * u
    }
}

/// Row-wise vertical concatenation.
pub fn vstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.ncols(), b.ncols(), "vstack column mismatch");
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn jitter_rescues_singular_matrix() {
        let m = DMatrix::from_element(3, 3, 2.0);
        let ch = JitteredCholesky::new(&m).expect("rank-one matrix factorizes after jitter");
        assert!(ch.jitter > 0.0 && ch.jitter <= JITTER_MAX * 2.0);
    }

    #[test]
    fn jitter_gives_up_on_indefinite_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(JitteredCholesky::new(&m).is_none());
    }

    #[test]
    fn psd_sqrt_reproduces_covariance() {
        let cov = DMatrix::from_row_slice(3, 3, &[4.0, 2.0, 0.6, 2.0, 2.0, 0.5, 0.6, 0.5, 1.0]);
        let l = psd_sqrt(&cov).unwrap();
        let back = &l * l.transpose();
        assert!((back - cov).norm() < 1e-6);
    }

    #[test]
    fn zero_covariance_gives_mean() {
        let draw = GaussianDraw::new(DVector::from_vec(vec![1.0, 2.0]), &DMatrix::zeros(2, 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(draw.draw(&mut rng), DVector::from_vec(vec![1.0, 2.0]));
    }
}
