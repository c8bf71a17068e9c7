//! Steady straight-and-level trim: lift equals weight, zero pitching moment.

use nalgebra::{Matrix2, Vector2};

use super::config::G;
use super::SimError;
use crate::aerodb::{Coefficient, CoefficientKey, DatabaseSample, Surface};

const TOL: f64 = 1e-10;
const MAX_ITER: usize = 50;
const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrimState {
    /// Angle of attack (deg).
    pub alpha: f64,
    /// Elevator deflection (deg).
    pub elevator: f64,
    /// `[C_L − W/(q̄S), C_m]` at the solution.
    pub residual: [f64; 2],
    pub iterations: usize,
    /// Some table was evaluated outside its grid.
    pub extrapolated: bool,
}

struct TrimProblem<'a> {
    sample: &'a DatabaseSample,
    lift: CoefficientKey,
    pitch: CoefficientKey,
    elevator: CoefficientKey,
    weight_coefficient: f64,
}

impl TrimProblem<'_> {
    fn residual(&self, x: Vector2<f64>) -> Result<(Vector2<f64>, bool), SimError> {
        let cl = self.sample.value(&self.lift, x[0], 0.0, 0.0)?;
        let cm = self.sample.value(&self.pitch, x[0], 0.0, 0.0)?;
        let de = self.sample.value(&self.elevator, x[0], 0.0, x[1])?;
        Ok((
            Vector2::new(cl.value - self.weight_coefficient, cm.value + de.value),
            cl.extrapolated || cm.extrapolated || de.extrapolated,
        ))
    }
}

/// Solves for `(α, δ_e)` at zero sideslip by damped Newton iteration with a
/// finite-difference Jacobian, starting from α = 2°, δ_e = 0.
pub fn trim(sample: &DatabaseSample, airspeed: f64, density: f64) -> Result<TrimState, SimError> {
    let qs = 0.5 * density * airspeed * airspeed * sample.reference.area;
    let problem = TrimProblem {
        sample,
        lift: CoefficientKey::base(Coefficient::Lift),
        pitch: CoefficientKey::base(Coefficient::Pitching),
        elevator: CoefficientKey::increment(Coefficient::Pitching, Surface::Elevator)?,
        weight_coefficient: sample.mass.mass * G / qs,
    };
    let alpha_axis = sample
        .surface(&problem.lift)
        .ok_or_else(|| crate::aerodb::AeroError::MissingKey(problem.lift.to_string()))?
        .axes()[0]
        .clone();
    let (a_lo, a_hi) = (alpha_axis[0], alpha_axis[alpha_axis.len() - 1]);

    let mut x = Vector2::new(2.0f64.clamp(a_lo, a_hi), 0.0);
    let (mut r, mut extrapolated) = problem.residual(x)?;
    let no_trim = |x: Vector2<f64>, r: Vector2<f64>| SimError::NoTrim {
        alpha: x[0],
        elevator: x[1],
        residual: r.amax(),
    };
    for it in 0..MAX_ITER {
        if r.amax() < TOL {
            return Ok(TrimState {
                alpha: x[0],
                elevator: x[1],
                residual: [r[0], r[1]],
                iterations: it,
                extrapolated,
            });
        }
        let mut jac = Matrix2::zeros();
        for j in 0..2 {
            let mut xp = x;
            xp[j] += FD_STEP;
            let (rp, _) = problem.residual(xp)?;
            jac.set_column(j, &((rp - r) / FD_STEP));
        }
        let step = jac.lu().solve(&(-r)).ok_or_else(|| no_trim(x, r))?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut xn = x + step * t;
            xn[0] = xn[0].clamp(a_lo, a_hi);
            let (rn, ex) = problem.residual(xn)?;
            if rn.amax() < r.amax() {
                x = xn;
                r = rn;
                extrapolated = ex;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(no_trim(x, r));
        }
    }
    if r.amax() < TOL {
        return Ok(TrimState {
            alpha: x[0],
            elevator: x[1],
            residual: [r[0], r[1]],
            iterations: MAX_ITER,
            extrapolated,
        });
    }
    Err(no_trim(x, r))
}

#[cfg(test)]
pub(crate) mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::aerodb::{GridSurface, MassProperties, ReferenceGeometry};

    /// C_L = 0.1·α, C_m = −0.02·α, ΔC_m(δ_e) = 0.01·δ_e, with the mass set so
    /// that W/(q̄S) equals `wc` at V = 50, ρ = 1.
    pub(crate) fn linear_sample(wc: f64) -> DatabaseSample {
        let alpha = vec![-10.0, 0.0, 10.0, 20.0];
        let beta = vec![-10.0, 0.0, 10.0];
        let delta = vec![-30.0, 0.0, 30.0];
        let mut s = BTreeMap::new();
        s.insert(
            "CL".parse().unwrap(),
            GridSurface::from_fn(vec![alpha.clone(), beta.clone()], |x| 0.1 * x[0]).unwrap(),
        );
        s.insert(
            "Cm".parse().unwrap(),
            GridSurface::from_fn(vec![alpha.clone(), beta], |x| -0.02 * x[0]).unwrap(),
        );
        s.insert(
            "Cm_elevator".parse().unwrap(),
            GridSurface::from_fn(vec![alpha, delta], |x| 0.01 * x[1]).unwrap(),
        );
        let reference = ReferenceGeometry::default();
        let qs = 0.5 * 50.0 * 50.0 * reference.area;
        let mass = MassProperties {
            mass: wc * qs / G,
            ..MassProperties::default()
        };
        DatabaseSample::from_surfaces(s, reference, mass).unwrap()
    }

    #[test]
    fn linear_system_oracle() {
        let t = trim(&linear_sample(0.5), 50.0, 1.0).unwrap();
        // 0.1 α = 0.5, −0.02 α + 0.01 δ = 0
        let sol = Matrix2::new(0.1, 0.0, -0.02, 0.01).lu().solve(&Vector2::new(0.5, 0.0)).unwrap();
        assert!((t.alpha - sol[0]).abs() < 1e-8);
        assert!((t.elevator - sol[1]).abs() < 1e-8);
        assert!((t.alpha - 5.0).abs() < 1e-8 && (t.elevator - 10.0).abs() < 1e-8);
        assert!(t.residual[0].abs() < 1e-8 && t.residual[1].abs() < 1e-8);
        assert!(!t.extrapolated);
    }

    #[test]
    fn weightless_trims_at_zero_lift() {
        let t = trim(&linear_sample(0.0), 50.0, 1.0).unwrap();
        assert!(t.alpha.abs() < 1e-9);
        assert!(t.elevator.abs() < 1e-8);
    }

    #[test]
    fn unreachable_lift_is_reported() {
        // C_L tops out at 2.0 on the grid
        let err = trim(&linear_sample(5.0), 50.0, 1.0).unwrap_err();
        assert!(matches!(err, SimError::NoTrim { .. }), "{err}");
    }
}
