//! Eigenspace perturbation of Reynolds stress tensors for turbulence
//! model-form uncertainty.
//!
//! A [`StressState`] holds the Reynolds stress as the velocity covariance
//! `⟨u'ᵢu'ⱼ⟩`, so that `R = 2k(b + I/3)` and `trace(R) = 2k`. The anisotropy
//! eigenvalues are mapped onto the barycentric triangle, moved toward one of
//! the limiting componentiality vertices, and the tensor is rebuilt with the
//! original turbulent kinetic energy.

use std::fmt;

use nalgebra::{Matrix3, SymmetricEigen, Vector2, Vector3};
use rayon::prelude::*;
use thiserror::Error;

/// Tolerance used for the symmetry, trace and realizability checks.
pub const TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TurbulenceError {
    #[error("tensor is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),
    #[error("turbulent kinetic energy {k} does not match trace/2 = {half_trace}")]
    TraceMismatch { k: f64, half_trace: f64 },
    #[error("degenerate state: anisotropy undefined for k = {0}")]
    DegenerateState(f64),
    #[error("negative parameter {name} = {value}")]
    NegativeParameter { name: &'static str, value: f64 },
    #[error("state is not realizable: barycentric weights {0:?}")]
    NonRealizable([f64; 3]),
    #[error("relaxation factor {0} outside [0, 1]")]
    InvalidRelaxation(f64),
    #[error("an interval needs at least two realizations, got {0}")]
    EnsembleTooSmall(usize),
    #[error("field {index} has length {found}, expected {expected}")]
    LengthMismatch { index: usize, expected: usize, found: usize },
    #[error("non-finite value in tensor")]
    NonFinite,
}

/// Barycentric triangle vertices: one-, two- and three-component limiting states.
pub const X_1C: Vector2<f64> = Vector2::new(1.0, 0.0);
pub const X_2C: Vector2<f64> = Vector2::new(0.0, 0.0);
pub const X_3C: Vector2<f64> = Vector2::new(0.5, 0.866_025_403_784_438_6);

/// Limiting-state anisotropy eigenvalues (descending).
pub const LAMBDA_1C: [f64; 3] = [2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0];
pub const LAMBDA_2C: [f64; 3] = [1.0 / 6.0, 1.0 / 6.0, -1.0 / 3.0];
pub const LAMBDA_3C: [f64; 3] = [0.0, 0.0, 0.0];

/// Symmetric Reynolds stress (velocity covariance) and turbulent kinetic energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressState {
    r: Matrix3<f64>,
    k: f64,
}

impl StressState {
    /// Builds a state with `k = trace(R)/2`.
    pub fn new(r: Matrix3<f64>) -> Result<Self, TurbulenceError> {
        check_symmetric(&r)?;
        Ok(Self { r, k: 0.5 * r.trace() })
    }

    /// Builds a state from a tensor and an independently supplied `k`, which
    /// must agree with `trace(R)/2`.
    pub fn with_k(r: Matrix3<f64>, k: f64) -> Result<Self, TurbulenceError> {
        check_symmetric(&r)?;
        let half_trace = 0.5 * r.trace();
        if !k.is_finite() || (k - half_trace).abs() > TOL * k.abs().max(half_trace.abs()).max(1e-300) + 1e-300 {
            return Err(TurbulenceError::TraceMismatch { k, half_trace });
        }
        Ok(Self { r, k })
    }

    /// Components in the field-file order `R11, R22, R33, R12, R13, R23`.
    pub fn from_components(c: [f64; 6], k: f64) -> Result<Self, TurbulenceError> {
        let r = Matrix3::new(c[0], c[3], c[4], c[3], c[1], c[5], c[4], c[5], c[2]);
        Self::with_k(r, k)
    }

    pub fn components(&self) -> [f64; 6] {
        let r = &self.r;
        [r[(0, 0)], r[(1, 1)], r[(2, 2)], r[(0, 1)], r[(0, 2)], r[(1, 2)]]
    }

    /// Velocity covariance `⟨u'ᵢu'ⱼ⟩`.
    pub fn tensor(&self) -> &Matrix3<f64> {
        &self.r
    }

    /// Stress-sign form `−⟨u'ᵢu'ⱼ⟩`, the quantity an eddy-viscosity model prescribes.
    pub fn stress_tensor(&self) -> Matrix3<f64> {
        -self.r
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

fn check_symmetric(r: &Matrix3<f64>) -> Result<(), TurbulenceError> {
    if r.iter().any(|v| !v.is_finite()) {
        return Err(TurbulenceError::NonFinite);
    }
    let scale = r.amax().max(1e-300);
    let asym = (r - r.transpose()).amax();
    if asym > 1e-12 * scale {
        return Err(TurbulenceError::Asymmetric(asym / scale));
    }
    Ok(())
}

/// Eddy-viscosity (Boussinesq) Reynolds stress `ν_t S − (2/3) k I`.
///
/// The returned state stores the covariance, so
/// `state.stress_tensor()` is the expression above and
/// `trace(stress_tensor) = ν_t·trace(S) − 2k`.
pub fn boussinesq_stress(strain: &Matrix3<f64>, k: f64, nu_t: f64) -> Result<StressState, TurbulenceError> {
    check_symmetric(strain)?;
    if k < 0.0 {
        return Err(TurbulenceError::NegativeParameter { name: "k", value: k });
    }
    if nu_t < 0.0 {
        return Err(TurbulenceError::NegativeParameter { name: "nu_t", value: nu_t });
    }
    let stress = strain * nu_t - Matrix3::identity() * (2.0 / 3.0 * k);
    let cov = -stress;
    Ok(StressState {
        r: cov,
        k: 0.5 * cov.trace(),
    })
}

/// Symmetric traceless anisotropy tensor `b = R/(2k) − I/3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisotropyTensor(pub Matrix3<f64>);

impl AnisotropyTensor {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }
}

pub fn anisotropy(state: &StressState) -> Result<AnisotropyTensor, TurbulenceError> {
    if !(state.k > 0.0) {
        return Err(TurbulenceError::DegenerateState(state.k));
    }
    Ok(AnisotropyTensor(state.r / (2.0 * state.k) - Matrix3::identity() / 3.0))
}

/// `R = 2k(b + I/3)`.
pub fn reconstruct_stress(b: &AnisotropyTensor, k: f64) -> Result<StressState, TurbulenceError> {
    if k < 0.0 {
        return Err(TurbulenceError::NegativeParameter { name: "k", value: k });
    }
    check_symmetric(&b.0)?;
    let r = (b.0 + Matrix3::identity() / 3.0) * (2.0 * k);
    Ok(StressState { r, k })
}

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenspace {
    pub values: [f64; 3],
    pub vectors: Matrix3<f64>,
}

impl Eigenspace {
    pub fn reassemble(&self) -> Matrix3<f64> {
        let lambda = Matrix3::from_diagonal(&Vector3::from(self.values));
        self.vectors * lambda * self.vectors.transpose()
    }
}

pub fn eig_decompose(b: &AnisotropyTensor) -> Eigenspace {
    if b.0.iter().all(|v| *v == 0.0) {
        return Eigenspace {
            values: [0.0; 3],
            vectors: Matrix3::identity(),
        };
    }
    let eig = SymmetricEigen::new(b.0);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.map(|i| eig.eigenvalues[i]);
    let vectors = Matrix3::from_columns(&order.map(|i| eig.eigenvectors.column(i).into_owned()));
    Eigenspace { values, vectors }
}

/// Position in the barycentric triangle and its convex weights on (1C, 2C, 3C).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarycentricPoint {
    pub coords: Vector2<f64>,
    pub weights: [f64; 3],
}

impl BarycentricPoint {
    pub fn is_realizable(&self) -> bool {
        self.weights.iter().all(|w| *w >= -TOL && *w <= 1.0 + TOL)
    }
}

/// Maps descending anisotropy eigenvalues to the barycentric triangle.
/// Non-realizable spectra are reported, never clamped.
pub fn to_barycentric(values: [f64; 3]) -> Result<BarycentricPoint, TurbulenceError> {
    let p = barycentric_unchecked(values);
    if !p.is_realizable() {
        return Err(TurbulenceError::NonRealizable(p.weights));
    }
    Ok(p)
}

fn barycentric_unchecked(l: [f64; 3]) -> BarycentricPoint {
    let weights = [l[0] - l[1], 2.0 * l[1] - 2.0 * l[2], 3.0 * l[2] + 1.0];
    let coords = X_1C * weights[0] + X_2C * weights[1] + X_3C * weights[2];
    BarycentricPoint { coords, weights }
}

/// Inverts the barycentric map: solves the two coordinate equations together
/// with `λ₁ + λ₂ + λ₃ = 0`, then sorts the result descending.
pub fn eigenvalues_from_barycentric(x: Vector2<f64>) -> [f64; 3] {
    // x − x_3C = λ₁ x_1C + λ₂ (2x_2C − x_1C) + λ₃ (3x_3C − 2x_2C)
    let c1 = X_1C;
    let c2 = X_2C * 2.0 - X_1C;
    let c3 = X_3C * 3.0 - X_2C * 2.0;
    let a = Matrix3::new(c1.x, c2.x, c3.x, c1.y, c2.y, c3.y, 1.0, 1.0, 1.0);
    let rhs = Vector3::new(x.x - X_3C.x, x.y - X_3C.y, 0.0);
    let sol = a
        .lu()
        .solve(&rhs)
        .expect("barycentric vertices are affinely independent");
    let mut l = [sol[0], sol[1], sol[2]];
    l.sort_by(|a, b| b.total_cmp(a));
    l
}

/// Limiting componentiality state that a perturbation moves toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Componentiality {
    One,
    Two,
    Three,
}

impl Componentiality {
    pub fn vertex(self) -> Vector2<f64> {
        match self {
            Componentiality::One => X_1C,
            Componentiality::Two => X_2C,
            Componentiality::Three => X_3C,
        }
    }

    pub fn eigenvalues(self) -> [f64; 3] {
        match self {
            Componentiality::One => LAMBDA_1C,
            Componentiality::Two => LAMBDA_2C,
            Componentiality::Three => LAMBDA_3C,
        }
    }
}

/// Eigenvector alignment. `VMax` keeps the alignment (the identity permutation);
/// `VMin` swaps the first and third eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EigenvectorMode {
    Identity,
    VMin,
    VMax,
}

impl EigenvectorMode {
    pub fn permutation(self) -> Matrix3<f64> {
        match self {
            EigenvectorMode::Identity | EigenvectorMode::VMax => Matrix3::identity(),
            EigenvectorMode::VMin => Matrix3::new(0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0),
        }
    }
}

pub const DEFAULT_RELAXATION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    pub target: Componentiality,
    pub eigenvectors: EigenvectorMode,
    /// Fraction of the distance to the target vertex, in [0, 1].
    pub relaxation: f64,
}

impl PerturbationSpec {
    pub fn new(target: Componentiality, eigenvectors: EigenvectorMode, relaxation: f64) -> Result<Self, TurbulenceError> {
        if !(0.0..=1.0).contains(&relaxation) {
            return Err(TurbulenceError::InvalidRelaxation(relaxation));
        }
        Ok(Self {
            target,
            eigenvectors,
            relaxation,
        })
    }

    /// The five distinct eigenvalue/eigenvector combinations
    /// (1C/2C/3C with v_max, 1C/2C with v_min).
    pub fn canonical(relaxation: f64) -> Result<[PerturbationSpec; 5], TurbulenceError> {
        use Componentiality::*;
        use EigenvectorMode::*;
        Ok([
            Self::new(One, VMax, relaxation)?,
            Self::new(Two, VMax, relaxation)?,
            Self::new(Three, VMax, relaxation)?,
            Self::new(One, VMin, relaxation)?,
            Self::new(Two, VMin, relaxation)?,
        ])
    }

    /// File-name label such as `1c_max`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for PerturbationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.target {
            Componentiality::One => "1c",
            Componentiality::Two => "2c",
            Componentiality::Three => "3c",
        };
        let v = match self.eigenvectors {
            EigenvectorMode::Identity => "id",
            EigenvectorMode::VMin => "min",
            EigenvectorMode::VMax => "max",
        };
        write!(f, "{c}_{v}")
    }
}

/// Applies one eigenspace perturbation. The eigenvalue shift is under-relaxed
/// by `spec.relaxation`; the eigenvector permutation is applied in full.
pub fn perturb(state: &StressState, spec: &PerturbationSpec) -> Result<StressState, TurbulenceError> {
    if !(0.0..=1.0).contains(&spec.relaxation) {
        return Err(TurbulenceError::InvalidRelaxation(spec.relaxation));
    }
    let b = anisotropy(state)?;
    let eig = eig_decompose(&b);
    let x = to_barycentric(eig.values)?;
    let keeps_alignment = spec.eigenvectors != EigenvectorMode::VMin;
    if spec.relaxation == 0.0 && keeps_alignment {
        return Ok(*state);
    }
    let target = spec.target.vertex();
    let moved = x.coords + (target - x.coords) * spec.relaxation;
    let values = if spec.relaxation == 1.0 {
        spec.target.eigenvalues()
    } else {
        eigenvalues_from_barycentric(moved)
    };
    let q = eig.vectors * spec.eigenvectors.permutation();
    let perturbed = Eigenspace { values, vectors: q }.reassemble();
    let sym = (perturbed + perturbed.transpose()) * 0.5;
    reconstruct_stress(&AnisotropyTensor(sym), state.k)
}

/// Perturbs every cell of a field independently.
pub fn perturb_field(states: &[StressState], spec: &PerturbationSpec) -> Result<Vec<StressState>, TurbulenceError> {
    states.par_iter().map(|s| perturb(s, spec)).collect()
}

/// Interval bound `(min, max)` over an ensemble of realizations of one quantity.
pub fn ensemble_bounds(values: &[f64]) -> Result<(f64, f64), TurbulenceError> {
    if values.len() < 2 {
        return Err(TurbulenceError::EnsembleTooSmall(values.len()));
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Gaussian surrogate of an interval whose ends sit at ±2σ: `(midpoint, width/4)`.
pub fn interval_to_gaussian(lo: f64, hi: f64) -> (f64, f64) {
    (0.5 * (lo + hi), 0.25 * (hi - lo))
}

/// Pointwise `max − min` across realizations of a scalar field.
pub fn variability_field(fields: &[Vec<f64>]) -> Result<Vec<f64>, TurbulenceError> {
    if fields.len() < 2 {
        return Err(TurbulenceError::EnsembleTooSmall(fields.len()));
    }
    let n = fields[0].len();
    if let Some((index, f)) = fields.iter().enumerate().find(|(_, f)| f.len() != n) {
        return Err(TurbulenceError::LengthMismatch {
            index,
            expected: n,
            found: f.len(),
        });
    }
    Ok((0..n)
        .map(|i| {
            let (lo, hi) = fields
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| (lo.min(f[i]), hi.max(f[i])));
            hi - lo
        })
        .collect())
}
