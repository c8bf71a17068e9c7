//! Per-step moment balance solved for aileron, elevator and rudder.

use nalgebra::{Matrix3, Vector3};

use super::config::EngineConfig;
use super::dynamics::RequiredAccelerations;
use super::trim::TrimState;
use super::SimError;
use crate::aerodb::{AeroError, Coefficient, CoefficientKey, DatabaseSample, Surface};

const SURFACES: [Surface; 3] = [Surface::Aileron, Surface::Elevator, Surface::Rudder];
const AXES: [Coefficient; 3] = [Coefficient::Rolling, Coefficient::Pitching, Coefficient::Yawing];
const TOL: f64 = 1e-14;
const MAX_ITER: usize = 50;
const FD_STEP: f64 = 1e-5;

/// An increment table restricted to the trim flight condition: piecewise
/// linear in δ with the table's own knots and boundary-cell extrapolation.
#[derive(Debug, Clone)]
struct Slice {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// The trim condition lies outside the table's α/β range.
    off_grid: bool,
}

impl Slice {
    fn new(sample: &DatabaseSample, key: &CoefficientKey, alpha: f64) -> Result<Self, AeroError> {
        let table = sample.surface(key).ok_or_else(|| AeroError::MissingKey(key.to_string()))?;
        let col = key.delta_column().expect("increment keys have a deflection input");
        let knots = table.axes()[col].clone();
        let off_grid = table.eval(&key.point(alpha, 0.0, knots[0])).extrapolated;
        let values = knots.iter().map(|d| table.eval(&key.point(alpha, 0.0, *d)).value).collect();
        Ok(Self { knots, values, off_grid })
    }

    fn eval(&self, d: f64) -> f64 {
        let n = self.knots.len();
        if n == 1 {
            return self.values[0];
        }
        let i = match self.knots.partition_point(|k| *k <= d) {
            0 => 0,
            p => (p - 1).min(n - 2),
        };
        let t = (d - self.knots[i]) / (self.knots[i + 1] - self.knots[i]);
        (1.0 - t) * self.values[i] + t * self.values[i + 1]
    }

    fn contains(&self, d: f64) -> bool {
        d >= self.knots[0] && d <= self.knots[self.knots.len() - 1]
    }
}

/// Moment coefficients of one database sample at the trim condition.
#[derive(Debug, Clone)]
pub struct MomentModel {
    /// `[C_l, C_m, C_n]` of the clean airframe.
    base: [f64; 3],
    clp: f64,
    clr: f64,
    cnp: f64,
    cnr: f64,
    cmq: f64,
    /// `slices[surface][axis]`.
    slices: [[Slice; 3]; 3],
    trim_extrapolated: bool,
    pub qbar_s: f64,
    pub span: f64,
    pub mac: f64,
    pub airspeed: f64,
}

impl MomentModel {
    pub fn new(sample: &DatabaseSample, alpha: f64, airspeed: f64, density: f64) -> Result<Self, AeroError> {
        let mut extrapolated = false;
        let mut get = |c: Coefficient| -> Result<f64, AeroError> {
            let l = sample.value(&CoefficientKey::base(c), alpha, 0.0, 0.0)?;
            extrapolated |= l.extrapolated;
            Ok(l.value)
        };
        let base = [get(Coefficient::Rolling)?, get(Coefficient::Pitching)?, get(Coefficient::Yawing)?];
        let clp = get(Coefficient::RollDamping)?;
        let clr = get(Coefficient::RollDueToYawRate)?;
        let cnp = get(Coefficient::YawDueToRollRate)?;
        let cnr = get(Coefficient::YawDamping)?;
        let cmq = get(Coefficient::PitchDamping)?;
        let slice = |s: Surface, c: Coefficient| Slice::new(sample, &CoefficientKey::increment(c, s)?, alpha);
        let row = |s: Surface| -> Result<[Slice; 3], AeroError> { Ok([slice(s, AXES[0])?, slice(s, AXES[1])?, slice(s, AXES[2])?]) };
        let slices = [row(SURFACES[0])?, row(SURFACES[1])?, row(SURFACES[2])?];
        extrapolated |= slices.iter().flatten().any(|s| s.off_grid);
        Ok(Self {
            base,
            clp,
            clr,
            cnp,
            cnr,
            cmq,
            slices,
            trim_extrapolated: extrapolated,
            qbar_s: 0.5 * density * airspeed * airspeed * sample.reference.area,
            span: sample.reference.span,
            mac: sample.reference.mac,
            airspeed,
        })
    }

    /// `[C_l, C_m, C_n]` including rate damping and the increments of
    /// `deflections = [δ_a, δ_e, δ_r]` (deg).
    pub fn coefficients(&self, rates: [f64; 3], deflections: [f64; 3]) -> [f64; 3] {
        let [p, q, r] = rates;
        let ph = p * self.span / (2.0 * self.airspeed);
        let qh = q * self.mac / (2.0 * self.airspeed);
        let rh = r * self.span / (2.0 * self.airspeed);
        let mut c = [
            self.base[0] + self.clp * ph + self.clr * rh,
            self.base[1] + self.cmq * qh,
            self.base[2] + self.cnp * ph + self.cnr * rh,
        ];
        for (s, d) in deflections.iter().enumerate() {
            for (a, ca) in c.iter_mut().enumerate() {
                *ca += self.slices[s][a].eval(*d);
            }
        }
        c
    }

    /// Aerodynamic moments (N·m) for the given coefficients.
    pub fn moments(&self, c: [f64; 3]) -> [f64; 3] {
        [self.qbar_s * self.span * c[0], self.qbar_s * self.mac * c[1], self.qbar_s * self.span * c[2]]
    }

    fn extrapolated(&self, deflections: [f64; 3]) -> bool {
        self.trim_extrapolated
            || deflections
                .iter()
                .enumerate()
                .any(|(s, d)| self.slices[s].iter().any(|sl| !sl.contains(*d)))
    }
}

/// Deflection histories (deg) and balance diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub aileron: Vec<f64>,
    pub elevator: Vec<f64>,
    pub rudder: Vec<f64>,
    /// `‖M_aero + M_engine − M_required‖₂` (N·m) per step.
    pub residual: Vec<f64>,
    pub extrapolated: bool,
}

/// Solves `M_aero(δ) + M_engine = M_required` at every time step by damped
/// Newton iteration, warm-started from the previous step.
pub fn allocate_controls(
    acc: &RequiredAccelerations,
    model: &MomentModel,
    engines: &EngineConfig,
    trim: &TrimState,
) -> Result<Allocation, SimError> {
    let n = acc.len();
    let mut out = Allocation {
        aileron: Vec::with_capacity(n),
        elevator: Vec::with_capacity(n),
        rudder: Vec::with_capacity(n),
        residual: Vec::with_capacity(n),
        extrapolated: false,
    };
    let engine = [0.0, 0.0, engines.yaw_moment()];
    let scale = [model.qbar_s * model.span, model.qbar_s * model.mac, model.qbar_s * model.span];
    let mut x = Vector3::new(0.0, trim.elevator, 0.0);
    for k in 0..n {
        let rates = [acc.p[k], acc.q[k], acc.r[k]];
        let target: [f64; 3] = std::array::from_fn(|i| (acc.moments[k][i] - engine[i]) / scale[i]);
        let resid = |x: &Vector3<f64>| -> Vector3<f64> {
            let c = model.coefficients(rates, [x[0], x[1], x[2]]);
            Vector3::new(c[0] - target[0], c[1] - target[1], c[2] - target[2])
        };
        let fail = |r: f64| SimError::AllocationFailed {
            step: k,
            time: acc.time[k],
            residual: r,
        };
        let mut r = resid(&x);
        let mut it = 0;
        while r.amax() > TOL {
            if it == MAX_ITER {
                return Err(fail(r.amax()));
            }
            it += 1;
            let mut jac = Matrix3::zeros();
            for j in 0..3 {
                let mut xp = x;
                xp[j] += FD_STEP;
                jac.set_column(j, &((resid(&xp) - r) / FD_STEP));
            }
            let step = jac.lu().solve(&(-r)).ok_or_else(|| fail(r.amax()))?;
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let xn = x + step * t;
                let rn = resid(&xn);
                if rn.amax() < r.amax() {
                    x = xn;
                    r = rn;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                return Err(fail(r.amax()));
            }
        }
        let c = model.coefficients(rates, [x[0], x[1], x[2]]);
        let m = model.moments(c);
        let res = (0..3)
            .map(|i| (m[i] + engine[i] - acc.moments[k][i]).powi(2))
            .sum::<f64>()
            .sqrt();
        out.aileron.push(x[0]);
        out.elevator.push(x[1]);
        out.rudder.push(x[2]);
        out.residual.push(res);
        out.extrapolated |= model.extrapolated([x[0], x[1], x[2]]);
    }
    Ok(out)
}
