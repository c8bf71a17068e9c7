//! Grid convergence study: observed order of accuracy, Richardson
//! extrapolation and the fine-grid convergence index.

use serde::Serialize;
use thiserror::Error;

/// Empirical factor of safety applied to the three-grid estimate.
pub const FACTOR_OF_SAFETY: f64 = 1.25;
const MAX_ITERATIONS: usize = 100;
const TOLERANCE: f64 = 1e-12;
const DAMPING: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GciError {
    #[error("dimension exponent must be 1/2 (2-D) or 1/3 (3-D), got {0}")]
    InvalidExponent(f64),
    #[error("node count must be positive")]
    InvalidNodeCount,
    #[error("node counts must strictly decrease from fine to coarse: {0:?}")]
    NotRefined([u64; 3]),
    #[error("non-finite solution value")]
    NonFinite,
    #[error("identical fine solutions (phi_2 - phi_1 = 0)")]
    IdenticalFineSolutions,
    #[error("identical coarse solutions (phi_3 - phi_2 = 0)")]
    IdenticalCoarseSolutions,
    #[error("oscillatory convergence: solution differences change sign (observed order {p:.6})")]
    Oscillatory { p: f64 },
    #[error("negative apparent order of convergence {p:.6}")]
    NegativeOrder { p: f64 },
    #[error("fixed-point iteration for the observed order did not converge (last p = {p})")]
    NonConvergent { p: f64 },
    #[error("fine-grid solution is zero; relative error undefined")]
    ZeroFineSolution,
}

/// Spatial dimension, selecting the exponent `A` of `h = (1/N)^A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Dimension {
    Two,
    Three,
}

impl Dimension {
    pub fn exponent(self) -> f64 {
        match self {
            Dimension::Two => 0.5,
            Dimension::Three => 1.0 / 3.0,
        }
    }

    pub fn from_exponent(a: f64) -> Result<Self, GciError> {
        if a == 0.5 {
            Ok(Dimension::Two)
        } else if (a - 1.0 / 3.0).abs() < 1e-15 {
            Ok(Dimension::Three)
        } else {
            Err(GciError::InvalidExponent(a))
        }
    }
}

/// One grid of the family: node count and the solution value on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridLevel {
    pub nodes: u64,
    pub phi: f64,
}

/// `h = (1/N)^A`.
pub fn representative_size(nodes: u64, exponent: f64) -> Result<f64, GciError> {
    let dim = Dimension::from_exponent(exponent)?;
    if nodes == 0 {
        return Err(GciError::InvalidNodeCount);
    }
    Ok(size_for(nodes, dim))
}

fn size_for(nodes: u64, dim: Dimension) -> f64 {
    match dim {
        Dimension::Two => (1.0 / nodes as f64).sqrt(),
        Dimension::Three => (1.0 / nodes as f64).cbrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservedOrder {
    pub p: f64,
    pub s: f64,
    pub q: f64,
    pub iterations: usize,
}

/// Solves `p = (ln|ε₃₂/ε₂₁| + q(p)) / ln r₂₁` by damped fixed-point iteration,
/// with `h` given fine to coarse.
pub fn observed_order_from_sizes(h: [f64; 3], phi: [f64; 3]) -> Result<ObservedOrder, GciError> {
    if phi.iter().chain(h.iter()).any(|v| !v.is_finite()) {
        return Err(GciError::NonFinite);
    }
    let r21 = h[1] / h[0];
    let r32 = h[2] / h[1];
    let e21 = phi[1] - phi[0];
    let e32 = phi[2] - phi[1];
    if e21 == 0.0 {
        return Err(GciError::IdenticalFineSolutions);
    }
    if e32 == 0.0 {
        return Err(GciError::IdenticalCoarseSolutions);
    }
    let ratio = e32 / e21;
    let s = ratio.signum();
    let ln_ratio = ratio.abs().ln();
    let ln_r21 = r21.ln();
    let q_of = |p: f64| ((r21.powf(p) - s) / (r32.powf(p) - s)).ln();

    let mut p = ln_ratio / ln_r21;
    let mut iterations = 0;
    loop {
        let q = q_of(p);
        let update = (ln_ratio + q) / ln_r21;
        if !update.is_finite() {
            return Err(GciError::NonConvergent { p });
        }
        let next = DAMPING * p + (1.0 - DAMPING) * update;
        iterations += 1;
        let converged = (next - p).abs() <= TOLERANCE * next.abs().max(1.0);
        p = next;
        if converged {
            break;
        }
        if iterations >= MAX_ITERATIONS {
            return Err(GciError::NonConvergent { p });
        }
    }
    let q = q_of(p);
    if s < 0.0 {
        return Err(GciError::Oscillatory { p });
    }
    if p <= 0.0 {
        return Err(GciError::NegativeOrder { p });
    }
    Ok(ObservedOrder { p, s, q, iterations })
}

fn validate(levels: &[GridLevel; 3]) -> Result<(), GciError> {
    let nodes = levels.map(|l| l.nodes);
    if nodes.contains(&0) {
        return Err(GciError::InvalidNodeCount);
    }
    if !(nodes[0] > nodes[1] && nodes[1] > nodes[2]) {
        return Err(GciError::NotRefined(nodes));
    }
    Ok(())
}

/// Observed order for three grids ordered finest first.
pub fn observed_order(levels: &[GridLevel; 3], dim: Dimension) -> Result<ObservedOrder, GciError> {
    validate(levels)?;
    observed_order_from_sizes(levels.map(|l| size_for(l.nodes, dim)), levels.map(|l| l.phi))
}

/// Complete three-grid error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GciReport {
    pub h: [f64; 3],
    pub r21: f64,
    pub r32: f64,
    pub eps21: f64,
    pub eps32: f64,
    pub p: f64,
    pub s: f64,
    pub q: f64,
    pub phi_fine: f64,
    pub phi_ext: f64,
    pub e_a: f64,
    pub gci_fine: f64,
    /// Half-width of the 95% interval `phi_1 ± GCI·|phi_1|`.
    pub error_bar: f64,
    pub fos: f64,
}

impl GciReport {
    pub fn interval(&self) -> (f64, f64) {
        (self.phi_fine - self.error_bar, self.phi_fine + self.error_bar)
    }
}

pub fn gci_report(levels: &[GridLevel; 3], dim: Dimension) -> Result<GciReport, GciError> {
    validate(levels)?;
    report_from_sizes(levels.map(|l| size_for(l.nodes, dim)), levels.map(|l| l.phi))
}

/// Same as [`gci_report`] with representative sizes supplied directly (fine to coarse).
pub fn report_from_sizes(h: [f64; 3], phi: [f64; 3]) -> Result<GciReport, GciError> {
    let order = observed_order_from_sizes(h, phi)?;
    if phi[0] == 0.0 {
        return Err(GciError::ZeroFineSolution);
    }
    let r21 = h[1] / h[0];
    let r32 = h[2] / h[1];
    let rp = r21.powf(order.p);
    let phi_ext = (rp * phi[0] - phi[1]) / (rp - 1.0);
    let e_a = ((phi[0] - phi[1]) / phi[0]).abs();
    let gci_fine = FACTOR_OF_SAFETY * e_a / (rp - 1.0);
    Ok(GciReport {
        h,
        r21,
        r32,
        eps21: phi[1] - phi[0],
        eps32: phi[2] - phi[1],
        p: order.p,
        s: order.s,
        q: order.q,
        phi_fine: phi[0],
        phi_ext,
        e_a,
        gci_fine,
        error_bar: gci_fine * phi[0].abs(),
        fos: FACTOR_OF_SAFETY,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manufactured(h: [f64; 3], exact: f64, c: f64, p: f64) -> [f64; 3] {
        h.map(|h| exact + c * h.powf(p))
    }

    #[test]
    fn representative_sizes() {
        assert_eq!(representative_size(1, 0.5).unwrap(), 1.0);
        assert!((representative_size(1_000_000, 0.5).unwrap() - 0.001).abs() < 1e-15);
        assert!((representative_size(8, 1.0 / 3.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(representative_size(8, 0.25), Err(GciError::InvalidExponent(0.25)));
    }

    #[test]
    fn quadratic_hand_case() {
        let h = [0.25, 0.5, 1.0];
        let rep = report_from_sizes(h, manufactured(h, 1.0, 1.0, 2.0)).unwrap();
        assert!((rep.p - 2.0).abs() < 1e-12);
        assert_eq!(rep.q, 0.0);
        assert!((rep.phi_ext - 1.0).abs() < 1e-12);
        assert!((rep.e_a - 0.1875 / 1.0625).abs() < 1e-15);
        assert!((rep.e_a - 0.17647).abs() < 1e-5);
        assert!((rep.gci_fine - 0.073529).abs() < 1e-6);
        assert!((rep.error_bar - rep.gci_fine * 1.0625).abs() < 1e-15);
    }

    #[test]
    fn cubic_decay() {
        let h = [0.1, 0.2, 0.4];
        let o = observed_order_from_sizes(h, manufactured(h, 0.3, -2.0, 3.0)).unwrap();
        assert!((o.p - 3.0).abs() < 1e-10);
    }

    #[test]
    fn non_uniform_ratios_converge() {
        let h = [0.1, 0.13, 0.2];
        let rep = report_from_sizes(h, manufactured(h, 0.02, 0.5, 1.7)).unwrap();
        assert!((rep.p - 1.7).abs() < 1e-9, "p = {}", rep.p);
        assert!((rep.phi_ext - 0.02).abs() < 1e-9);
        assert!(rep.q != 0.0);
    }

    #[test]
    fn degenerate_inputs() {
        let h = [0.25, 0.5, 1.0];
        assert_eq!(observed_order_from_sizes(h, [1.0, 1.0, 2.0]), Err(GciError::IdenticalFineSolutions));
        assert_eq!(report_from_sizes(h, [1.0, 1.0, 1.0]), Err(GciError::IdenticalFineSolutions));
        assert!(matches!(
            observed_order_from_sizes(h, [1.0, 1.2, 1.1]),
            Err(GciError::Oscillatory { .. })
        ));
        // error grows under refinement
        assert!(matches!(
            observed_order_from_sizes(h, [2.0, 1.5, 1.25]),
            Err(GciError::NegativeOrder { .. })
        ));
        let bad = [
            GridLevel { nodes: 4, phi: 1.0 },
            GridLevel { nodes: 16, phi: 1.1 },
            GridLevel { nodes: 1, phi: 1.3 },
        ];
        assert!(matches!(gci_report(&bad, Dimension::Two), Err(GciError::NotRefined(_))));
    }

    #[test]
    fn node_based_report() {
        let levels = [
            GridLevel { nodes: 16, phi: 1.0625 },
            GridLevel { nodes: 4, phi: 1.25 },
            GridLevel { nodes: 1, phi: 2.0 },
        ];
        let rep = gci_report(&levels, Dimension::Two).unwrap();
        assert_eq!(rep.h, [0.25, 0.5, 1.0]);
        assert!((rep.p - 2.0).abs() < 1e-12);
        assert!((rep.phi_ext - 1.0).abs() < 1e-12);
    }
}
