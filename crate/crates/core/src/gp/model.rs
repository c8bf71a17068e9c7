use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::kernel::{kernel_gram, kernel_matrix};
use super::optimize::{maximize, SearchSpace};
use super::{BasisSpec, Dataset, GpError, KernelParams, OptimizerConfig};
use crate::linalg::{symmetrize_clamp, GaussianDraw, JitteredCholesky};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Generalized-least-squares solution for a fixed covariance.
#[derive(Debug, Clone)]
pub(crate) struct GlsSolution {
    pub chol: JitteredCholesky,
    pub beta: DVector<f64>,
    /// `V⁻¹ (y − D β)`.
    /// `L⁻¹ (y − Dβ)`.
    pub whitened: DVector<f64>,
    pub log_likelihood: f64,
}

/// `β = (Dᵀ V⁻¹ D)⁻¹ Dᵀ V⁻¹ y` and the Gaussian log marginal likelihood of the residual.
pub(crate) fn gls(v: &DMatrix<f64>, design: &DMatrix<f64>, y: &DVector<f64>) -> Result<GlsSolution, GpError> {
    let chol = JitteredCholesky::new(v).ok_or(GpError::NotPositiveDefinite)?;
    let beta = gls_beta(&chol, design, y)?;
    Ok(finish(chol, design, y, beta))
}

/// Same as [`gls`] but with β supplied rather than estimated.
pub(crate) fn with_beta(
    v: &DMatrix<f64>,
    design: &DMatrix<f64>,
    y: &DVector<f64>,
    beta: DVector<f64>,
) -> Result<GlsSolution, GpError> {
    let chol = JitteredCholesky::new(v).ok_or(GpError::NotPositiveDefinite)?;
    Ok(finish(chol, design, y, beta))
}

fn gls_beta(chol: &JitteredCholesky, design: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>, GpError> {
    let w = chol.solve_lower(design);
    let z = chol.solve_lower(&DMatrix::from_column_slice(y.len(), 1, y.as_slice()));
    let svd = w.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin <= 1e-10 * smax {
        return Err(GpError::RankDeficient);
    }
    let beta = svd.solve(&z, 0.0).map_err(|_| GpError::RankDeficient)?;
    Ok(beta.column(0).into_owned())
}

fn finish(chol: JitteredCholesky, design: &DMatrix<f64>, y: &DVector<f64>, beta: DVector<f64>) -> GlsSolution {
    let residual = y - design * &beta;
    let whitened = chol.solve_lower_vec(&residual);
    let n = y.len() as f64;
    let log_likelihood = -0.5 * chol.log_det() - 0.5 * whitened.norm_squared() - 0.5 * n * LN_2PI;
    GlsSolution {
        chol,
        beta,
        whitened,
        log_likelihood,
    }
}

/// `K(X, X) + diag(σ²)`.
pub(crate) fn training_covariance(data: &Dataset, kernel: &KernelParams) -> DMatrix<f64> {
    let mut v = kernel_gram(data.inputs(), kernel);
    for (i, s2) in data.noise_variance().iter().enumerate() {
        v[(i, i)] += s2;
    }
    v
}

/// Fitted single-fidelity GP. Immutable after construction.
#[derive(Debug, Clone)]
pub struct GpModel {
    dataset: Dataset,
    basis: BasisSpec,
    kernel: KernelParams,
    beta: DVector<f64>,
    chol: JitteredCholesky,
    whitened: DVector<f64>,
    log_likelihood: f64,
}

impl GpModel {
    /// Fits hyperparameters by maximizing the log marginal likelihood, then
    /// computes β̂ from the fitted covariance.
    pub fn fit(data: Dataset, basis: BasisSpec, cfg: &OptimizerConfig) -> Result<Self, GpError> {
        check_sizes(&data, &basis)?;
        let design = basis.design(data.inputs());
        let space = SearchSpace::for_data(&data, data.outputs(), cfg);
        let noiseless = data.noise_sd().iter().all(|s| *s == 0.0);
        let objective = |theta: &[f64]| {
            let kernel = KernelParams::from_log(theta);
            let v = training_covariance(&data, &kernel);
            gls(&v, &design, data.outputs())
                .ok()
                .filter(|s| s.chol.jitter == 0.0 || !noiseless)
                .map(|s| s.log_likelihood)
        };
        let (theta, _) = maximize(objective, &space, cfg).ok_or(GpError::NotPositiveDefinite)?;
        Self::with_kernel(data, basis, KernelParams::from_log(&theta))
    }

    /// Conditions on the data with fixed hyperparameters (β̂ estimated).
    pub fn with_kernel(data: Dataset, basis: BasisSpec, kernel: KernelParams) -> Result<Self, GpError> {
        check_sizes(&data, &basis)?;
        check_kernel(&data, &kernel)?;
        let design = basis.design(data.inputs());
        let v = training_covariance(&data, &kernel);
        let sol = gls(&v, &design, data.outputs())?;
        Ok(Self::assemble(data, basis, kernel, sol))
    }

    /// Rebuilds a model from stored parts without re-estimating β.
    pub fn from_parts(
        data: Dataset,
        basis: BasisSpec,
        kernel: KernelParams,
        beta: DVector<f64>,
    ) -> Result<Self, GpError> {
        check_kernel(&data, &kernel)?;
        let design = basis.design(data.inputs());
        if beta.len() != design.ncols() {
            return Err(GpError::DimensionMismatch {
                what: "beta",
                expected: design.ncols(),
                found: beta.len(),
            });
        }
        let v = training_covariance(&data, &kernel);
        let sol = with_beta(&v, &design, data.outputs(), beta)?;
        Ok(Self::assemble(data, basis, kernel, sol))
    }

    fn assemble(dataset: Dataset, basis: BasisSpec, kernel: KernelParams, sol: GlsSolution) -> Self {
        Self {
            dataset,
            basis,
            kernel,
            beta: sol.beta,
            chol: sol.chol,
            whitened: sol.whitened,
            log_likelihood: sol.log_likelihood,
        }
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn basis(&self) -> BasisSpec {
        self.basis
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn dim(&self) -> usize {
        self.dataset.dim()
    }

    /// Log marginal likelihood at the fitted hyperparameters.
    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    /// Diagonal jitter that was added to make V factorizable.
    pub fn jitter(&self) -> f64 {
        self.chol.jitter
    }

    /// Predictive mean and full covariance at the rows of `query`.
    pub fn predict(&self, query: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>), GpError> {
        self.check_query(query)?;
        let k_star = kernel_matrix(query, self.dataset.inputs(), &self.kernel);
        let a = self.chol.solve_lower(&k_star.transpose());
        let mean = self.basis.design(query) * &self.beta + a.tr_mul(&self.whitened);
        let mut cov = kernel_gram(query, &self.kernel) - a.transpose() * a;
        symmetrize_clamp(&mut cov);
        Ok((mean, cov))
    }

    /// Predictive mean only.
    pub fn predict_mean(&self, query: &DMatrix<f64>) -> Result<DVector<f64>, GpError> {
        self.check_query(query)?;
        let k_star = kernel_matrix(query, self.dataset.inputs(), &self.kernel);
        let a = self.chol.solve_lower(&k_star.transpose());
        Ok(self.basis.design(query) * &self.beta + a.tr_mul(&self.whitened))
    }

    /// `count` draws `μ + L·U` of the predictive distribution, one per row.
    pub fn sample(&self, query: &DMatrix<f64>, count: usize, seed: u64) -> Result<DMatrix<f64>, GpError> {
        let (mean, cov) = self.predict(query)?;
        draw_rows(mean, &cov, count, seed)
    }

    fn check_query(&self, query: &DMatrix<f64>) -> Result<(), GpError> {
        if query.ncols() != self.dim() && query.nrows() > 0 {
            return Err(GpError::DimensionMismatch {
                what: "query columns",
                expected: self.dim(),
                found: query.ncols(),
            });
        }
        Ok(())
    }
}

/// Log marginal likelihood of `data` under fixed hyperparameters, with β̂ re-estimated.
pub fn log_marginal_likelihood(data: &Dataset, basis: &BasisSpec, kernel: &KernelParams) -> Result<f64, GpError> {
    check_kernel(data, kernel)?;
    let design = basis.design(data.inputs());
    let v = training_covariance(data, kernel);
    Ok(gls(&v, &design, data.outputs())?.log_likelihood)
}

pub(crate) fn draw_rows(mean: DVector<f64>, cov: &DMatrix<f64>, count: usize, seed: u64) -> Result<DMatrix<f64>, GpError> {
    let n = mean.len();
    let draw = GaussianDraw::new(mean, cov).ok_or(GpError::NotFactorizable)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DMatrix::zeros(count, n);
    for r in 0..count {
        let s = draw.draw(&mut rng);
        out.row_mut(r).copy_from(&s.transpose());
    }
    Ok(out)
}

fn check_sizes(data: &Dataset, basis: &BasisSpec) -> Result<(), GpError> {
    if data.is_empty() {
        return Err(GpError::InvalidData("empty dataset".into()));
    }
    let p = basis.dimension(data.dim());
    if data.len() < p {
        return Err(GpError::Underdetermined { n: data.len(), p });
    }
    Ok(())
}

fn check_kernel(data: &Dataset, kernel: &KernelParams) -> Result<(), GpError> {
    kernel.validate()?;
    if kernel.dim() != data.dim() {
        return Err(GpError::DimensionMismatch {
            what: "length scales",
            expected: data.dim(),
            found: kernel.dim(),
        });
    }
    Ok(())
}

/// On-disk form of a fitted GP; the factorization is rebuilt on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GpRecord {
    pub basis_degree: usize,
    pub kernel: KernelParams,
    pub beta: Vec<f64>,
    pub dataset: Dataset,
}

impl From<&GpModel> for GpRecord {
    fn from(m: &GpModel) -> Self {
        Self {
            basis_degree: m.basis.degree,
            kernel: m.kernel.clone(),
            beta: m.beta.iter().cloned().collect(),
            dataset: m.dataset.clone(),
        }
    }
}

impl TryFrom<GpRecord> for GpModel {
    type Error = GpError;

    fn try_from(r: GpRecord) -> Result<Self, GpError> {
        GpModel::from_parts(
            r.dataset,
            BasisSpec::new(r.basis_degree),
            r.kernel,
            DVector::from_vec(r.beta),
        )
    }
}
