//! Recursive auto-regressive multi-fidelity GP.
//!
//! Level `t > 1` models `Z_t(x) = ρ_{t−1}(x) Z_{t−1}(x) + δ_t(x)` with
//! `ρ_{t−1}(x) = g(x)ᵀ β_ρ` and an independent discrepancy GP `δ_t`. Each
//! level is trained on its own data only; the previous level enters through
//! its predictive mean and covariance evaluated at the level's inputs, so the
//! design sets do not have to be nested.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::gp::{
    draw_rows, gls, kernel_gram, kernel_matrix, maximize, training_covariance, with_beta, BasisSpec, Dataset,
    GpError, GpModel, GpRecord, KernelParams, OptimizerConfig, SearchSpace,
};
use crate::linalg::{symmetrize_clamp, vstack, JitteredCholesky};

/// Training inputs for one fidelity level.
#[derive(Debug, Clone)]
pub struct LevelSpec {
    /// 1-based fidelity index (1 = lowest).
    pub fidelity: usize,
    pub data: Dataset,
    /// Basis of the level's own regression trend (columns of `F_t`).
    pub basis: BasisSpec,
    /// Basis `g` of the multiplicative trend ρ. Ignored for the lowest level.
    pub trend: BasisSpec,
    pub optimizer: OptimizerConfig,
}

impl LevelSpec {
    pub fn new(fidelity: usize, data: Dataset) -> Self {
        Self {
            fidelity,
            data,
            basis: BasisSpec::default(),
            trend: BasisSpec::CONSTANT,
            optimizer: OptimizerConfig::default(),
        }
    }
}

/// A fitted level above the lowest one.
#[derive(Debug, Clone)]
pub struct FidelityLevel {
    index: usize,
    dataset: Dataset,
    kernel: KernelParams,
    basis: BasisSpec,
    trend: BasisSpec,
    beta: DVector<f64>,
    beta_rho: DVector<f64>,
    // μ_{t−1}(X_t), ρ_{t−1}(X_t) and the factorization of
    // (ρρᵀ) ⊙ σ²_{t−1}(X_t, X_t) + K_t + Σ_t.
    prev_mean: DVector<f64>,
    rho_train: DVector<f64>,
    chol: JitteredCholesky,
    whitened: DVector<f64>,
    log_likelihood: f64,
}

impl FidelityLevel {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn beta_rho(&self) -> &DVector<f64> {
        &self.beta_rho
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    /// Cached previous-level mean at this level's inputs.
    pub fn previous_mean(&self) -> &DVector<f64> {
        &self.prev_mean
    }

    /// Multiplicative trend ρ at arbitrary points.
    pub fn rho(&self, x: &DMatrix<f64>) -> DVector<f64> {
        self.trend.design(x) * &self.beta_rho
    }
}

/// Ordered stack of fitted fidelity levels.
#[derive(Debug, Clone)]
pub struct MfgpModel {
    base: GpModel,
    upper: Vec<FidelityLevel>,
}

impl From<GpModel> for MfgpModel {
    fn from(base: GpModel) -> Self {
        Self { base, upper: Vec::new() }
    }
}

impl MfgpModel {
    /// Fits all levels bottom-up. Specs must be ordered 1, 2, …, s.
    pub fn build(specs: Vec<LevelSpec>) -> Result<Self, GpError> {
        let mut iter = specs.into_iter();
        let first = iter.next().ok_or_else(|| GpError::InvalidData("no fidelity levels".into()))?;
        if first.fidelity != 1 {
            return Err(GpError::LevelOrder {
                expected: 1,
                found: first.fidelity,
            });
        }
        let mut model = MfgpModel::from(GpModel::fit(first.data, first.basis, &first.optimizer)?);
        for spec in iter {
            model.fit_level(spec)?;
        }
        Ok(model)
    }

    /// Fits the next level on top of the current stack.
    pub fn fit_level(&mut self, spec: LevelSpec) -> Result<&FidelityLevel, GpError> {
        let t = self.levels() + 1;
        if spec.fidelity != t {
            return Err(GpError::LevelOrder {
                expected: t,
                found: spec.fidelity,
            });
        }
        let data = spec.data;
        if data.is_empty() {
            return Err(GpError::InvalidData(format!("fidelity level {t} has no data")));
        }
        if data.dim() != self.dim() {
            return Err(GpError::DimensionMismatch {
                what: "level input columns",
                expected: self.dim(),
                found: data.dim(),
            });
        }
        let q = spec.trend.dimension(data.dim());
        let p = spec.basis.dimension(data.dim());
        if data.len() < q + p {
            return Err(GpError::DegenerateLevel {
                level: t,
                n: data.len(),
                needed: q + p,
            });
        }

        let (prev_mean, prev_cov) = self.predict_level(t - 1, data.inputs())?;
        let g = spec.trend.design(data.inputs());
        let f = spec.basis.design(data.inputs());
        let mut j = DMatrix::zeros(data.len(), q + p);
        for i in 0..data.len() {
            for c in 0..q {
                j[(i, c)] = g[(i, c)] * prev_mean[i];
            }
            for c in 0..p {
                j[(i, q + c)] = f[(i, c)];
            }
        }

        let y = data.outputs();
        let space = SearchSpace::for_data(&data, y, &spec.optimizer);
        let objective = |theta: &[f64]| {
            let kernel = KernelParams::from_log(theta);
            let v = training_covariance(&data, &kernel);
            gls(&v, &j, y).ok().map(|s| s.log_likelihood)
        };
        let (theta, _) = maximize(objective, &space, &spec.optimizer).ok_or(GpError::NotPositiveDefinite)?;
        let kernel = KernelParams::from_log(&theta);
        let v = training_covariance(&data, &kernel);
        let sol = gls(&v, &j, y)?;
        let beta_rho = sol.beta.rows(0, q).into_owned();
        let beta = sol.beta.rows(q, p).into_owned();

        let level = assemble_level(
            t,
            data,
            kernel,
            spec.basis,
            spec.trend,
            beta,
            beta_rho,
            prev_mean,
            &prev_cov,
            sol.log_likelihood,
        )?;
        self.upper.push(level);
        Ok(self.upper.last().expect("just pushed"))
    }

    /// Number of fitted levels `s`.
    pub fn levels(&self) -> usize {
        1 + self.upper.len()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn base(&self) -> &GpModel {
        &self.base
    }

    /// Level `t ≥ 2`.
    pub fn level(&self, t: usize) -> Option<&FidelityLevel> {
        t.checked_sub(2).and_then(|i| self.upper.get(i))
    }

    /// Predictive mean and covariance of the top level.
    pub fn predict(&self, query: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>), GpError> {
        self.predict_level(self.levels(), query)
    }

    /// Predictive mean and covariance of level `t` (1-based).
    pub fn predict_level(&self, t: usize, query: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>), GpError> {
        if t == 0 || t > self.levels() {
            return Err(GpError::UnknownLevel {
                requested: t,
                levels: self.levels(),
            });
        }
        if query.nrows() > 0 && query.ncols() != self.dim() {
            return Err(GpError::DimensionMismatch {
                what: "query columns",
                expected: self.dim(),
                found: query.ncols(),
            });
        }
        if t == 1 {
            return self.base.predict(query);
        }
        let lvl = &self.upper[t - 2];
        let nq = query.nrows();
        let nt = lvl.dataset.len();
        let stacked = vstack(query, lvl.dataset.inputs());
        let (m_prev, c_prev) = self.predict_level(t - 1, &stacked)?;

        let mu_q = m_prev.rows(0, nq);
        let c_qq = c_prev.view((0, 0), (nq, nq));
        let c_qt = c_prev.view((0, nq), (nq, nt));
        let rho_q = lvl.rho(query);

        let mut cross = kernel_matrix(query, lvl.dataset.inputs(), &lvl.kernel);
        for i in 0..nq {
            for j in 0..nt {
                cross[(i, j)] += rho_q[i] * lvl.rho_train[j] * c_qt[(i, j)];
            }
        }
        let a = lvl.chol.solve_lower(&cross.transpose());
        let mean = rho_q.component_mul(&mu_q) + lvl.basis.design(query) * &lvl.beta + a.tr_mul(&lvl.whitened);

        let mut cov = kernel_gram(query, &lvl.kernel);
        for i in 0..nq {
            for j in 0..nq {
                cov[(i, j)] += rho_q[i] * rho_q[j] * c_qq[(i, j)];
            }
        }
        cov -= a.transpose() * a;
        symmetrize_clamp(&mut cov);
        Ok((mean, cov))
    }

    /// Draws `count` realizations of level `t` at `query`, one per row.
    pub fn sample_level(&self, t: usize, query: &DMatrix<f64>, count: usize, seed: u64) -> Result<DMatrix<f64>, GpError> {
        let (mean, cov) = self.predict_level(t, query)?;
        draw_rows(mean, &cov, count, seed)
    }

    pub fn sample(&self, query: &DMatrix<f64>, count: usize, seed: u64) -> Result<DMatrix<f64>, GpError> {
        self.sample_level(self.levels(), query, count, seed)
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble_level(
    index: usize,
    dataset: Dataset,
    kernel: KernelParams,
    basis: BasisSpec,
    trend: BasisSpec,
    beta: DVector<f64>,
    beta_rho: DVector<f64>,
    prev_mean: DVector<f64>,
    prev_cov: &DMatrix<f64>,
    log_likelihood: f64,
) -> Result<FidelityLevel, GpError> {
    let x = dataset.inputs();
    let rho_train = trend.design(x) * &beta_rho;
    let n = dataset.len();
    let mut a = training_covariance(&dataset, &kernel);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] += rho_train[i] * rho_train[j] * prev_cov[(i, j)];
        }
    }
    let chol = JitteredCholesky::new(&a).ok_or(GpError::NotPositiveDefinite)?;
    let residual = dataset.outputs() - rho_train.component_mul(&prev_mean) - basis.design(x) * &beta;
    let whitened = chol.solve_lower_vec(&residual);
    Ok(FidelityLevel {
        index,
        dataset,
        kernel,
        basis,
        trend,
        beta,
        beta_rho,
        prev_mean,
        rho_train,
        chol,
        whitened,
        log_likelihood,
    })
}

/// On-disk form of a multi-fidelity model; every level's data is embedded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MfgpRecord {
    pub base: GpRecord,
    #[serde(default)]
    pub levels: Vec<LevelRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelRecord {
    pub fidelity: usize,
    pub basis_degree: usize,
    pub trend_degree: usize,
    pub kernel: KernelParams,
    pub beta: Vec<f64>,
    pub beta_rho: Vec<f64>,
    pub dataset: Dataset,
}

impl From<&MfgpModel> for MfgpRecord {
    fn from(m: &MfgpModel) -> Self {
        Self {
            base: GpRecord::from(&m.base),
            levels: m
                .upper
                .iter()
                .map(|l| LevelRecord {
                    fidelity: l.index,
                    basis_degree: l.basis.degree,
                    trend_degree: l.trend.degree,
                    kernel: l.kernel.clone(),
                    beta: l.beta.iter().cloned().collect(),
                    beta_rho: l.beta_rho.iter().cloned().collect(),
                    dataset: l.dataset.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<MfgpRecord> for MfgpModel {
    type Error = GpError;

    fn try_from(r: MfgpRecord) -> Result<Self, GpError> {
        let mut model = MfgpModel::from(GpModel::try_from(r.base)?);
        for rec in r.levels {
            let t = model.levels() + 1;
            if rec.fidelity != t {
                return Err(GpError::LevelOrder {
                    expected: t,
                    found: rec.fidelity,
                });
            }
            let basis = BasisSpec::new(rec.basis_degree);
            let trend = BasisSpec::new(rec.trend_degree);
            let m = rec.dataset.dim();
            if rec.beta.len() != basis.dimension(m) || rec.beta_rho.len() != trend.dimension(m) {
                return Err(GpError::DimensionMismatch {
                    what: "stored level coefficients",
                    expected: basis.dimension(m) + trend.dimension(m),
                    found: rec.beta.len() + rec.beta_rho.len(),
                });
            }
            rec.kernel.validate()?;
            let (prev_mean, prev_cov) = model.predict_level(t - 1, rec.dataset.inputs())?;
            let beta = DVector::from_vec(rec.beta);
            let beta_rho = DVector::from_vec(rec.beta_rho);
            // Recompute the level likelihood for reporting.
            let g = trend.design(rec.dataset.inputs());
            let f = basis.design(rec.dataset.inputs());
            let q = g.ncols();
            let mut j = DMatrix::zeros(rec.dataset.len(), q + f.ncols());
            for i in 0..rec.dataset.len() {
                for c in 0..q {
                    j[(i, c)] = g[(i, c)] * prev_mean[i];
                }
                for c in 0..f.ncols() {
                    j[(i, q + c)] = f[(i, c)];
                }
            }
            let coef = DVector::from_iterator(q + f.ncols(), beta_rho.iter().chain(beta.iter()).cloned());
            let v = training_covariance(&rec.dataset, &rec.kernel);
            let lml = with_beta(&v, &j, rec.dataset.outputs(), coef)?.log_likelihood;
            let level = assemble_level(
                t,
                rec.dataset,
                rec.kernel,
                basis,
                trend,
                beta,
                beta_rho,
                prev_mean,
                &prev_cov,
                lml,
            )?;
            model.upper.push(level);
        }
        Ok(model)
    }
}
