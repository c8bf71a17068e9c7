//! Body rates and rotational accelerations that realize a bank-angle history
//! in a level, coordinated turn.

use super::config::G;
use super::trajectory::Trajectory;
use crate::aerodb::MassProperties;

/// Body-axis rates (rad/s), accelerations (rad/s²) and the moments (N·m)
/// needed to produce them, one entry per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct RequiredAccelerations {
    pub time: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    pub p_dot: Vec<f64>,
    pub q_dot: Vec<f64>,
    pub r_dot: Vec<f64>,
    /// `[L, M, N]`.
    pub moments: Vec<[f64; 3]>,
}

impl RequiredAccelerations {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }
}

/// `[I_xx·ṗ, I_yy·q̇, I_zz·ṙ]`.
pub fn moments_from_accelerations(mass: &MassProperties, acc: [f64; 3]) -> [f64; 3] {
    [mass.ixx * acc[0], mass.iyy * acc[1], mass.izz * acc[2]]
}

/// Rates and accelerations for a constant-altitude turn without sideslip.
///
/// The heading rate is `ψ̇ = g·tan φ / V` and the pitch attitude is held at
/// `theta` (rad). Euler-angle rates map to body rates through
/// `p = φ̇ − ψ̇ sin θ`, `q = ψ̇ sin φ cos θ`, `r = ψ̇ cos φ cos θ`.
pub fn required_accelerations(
    traj: &Trajectory,
    theta: f64,
    airspeed: f64,
    mass: &MassProperties,
) -> RequiredAccelerations {
    let n = traj.len();
    let mut out = RequiredAccelerations {
        time: traj.time.clone(),
        p: Vec::with_capacity(n),
        q: Vec::with_capacity(n),
        r: Vec::with_capacity(n),
        p_dot: Vec::with_capacity(n),
        q_dot: Vec::with_capacity(n),
        r_dot: Vec::with_capacity(n),
        moments: Vec::with_capacity(n),
    };
    let (st, ct) = theta.sin_cos();
    for k in 0..n {
        let (phi, phi_d, phi_dd) = (traj.phi[k], traj.phi_dot[k], traj.phi_ddot[k]);
        let (sp, cp) = phi.sin_cos();
        let psi_d = G * phi.tan() / airspeed;
        let psi_dd = G * phi_d / (cp * cp * airspeed);
        let p = phi_d - psi_d * st;
        let q = psi_d * sp * ct;
        let r = psi_d * cp * ct;
        let p_dot = phi_dd - psi_dd * st;
        let q_dot = ct * (psi_dd * sp + psi_d * cp * phi_d);
        let r_dot = ct * (psi_dd * cp - psi_d * sp * phi_d);
        out.p.push(p);
        out.q.push(q);
        out.r.push(r);
        out.p_dot.push(p_dot);
        out.q_dot.push(q_dot);
        out.r_dot.push(r_dot);
        out.moments.push(moments_from_accelerations(mass, [p_dot, q_dot, r_dot]));
    }
    out
}
