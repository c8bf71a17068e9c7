//! Bank-angle history built from minimum-jerk (quintic) segments.

use super::config::ManeuverSpec;
use super::SimError;

/// Hold or transition to `target_bank` (degrees) over `duration` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub duration: f64,
    pub target_bank: f64,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    start: f64,
    duration: f64,
    from: f64,
    delta: f64,
}

impl Segment {
    /// (φ, φ̇, φ̈) in radians.
    fn eval(&self, t: f64) -> (f64, f64, f64) {
        if self.delta == 0.0 || self.duration == 0.0 {
            return (self.from + self.delta, 0.0, 0.0);
        }
        let s = ((t - self.start) / self.duration).clamp(0.0, 1.0);
        let (s2, s3) = (s * s, s * s * s);
        let pos = 10.0 * s3 - 15.0 * s2 * s2 + 6.0 * s3 * s2;
        let vel = 30.0 * s2 - 60.0 * s3 + 30.0 * s2 * s2;
        let acc = 60.0 * s - 180.0 * s2 + 120.0 * s3;
        let d = self.delta;
        let tt = self.duration;
        (self.from + d * pos, d * vel / tt, d * acc / (tt * tt))
    }
}

/// Bank angle and its first two derivatives on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub time: Vec<f64>,
    /// Bank angle (rad).
    pub phi: Vec<f64>,
    pub phi_dot: Vec<f64>,
    pub phi_ddot: Vec<f64>,
    /// Start and end of each phase (s).
    pub boundaries: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn duration(&self) -> f64 {
        *self.time.last().unwrap_or(&0.0)
    }
}

/// Peak |φ̈| of one quintic transition of `delta` over `duration`,
/// reached at `s = (3 − √3)/6`.
pub fn quintic_peak_acceleration(delta: f64, duration: f64) -> f64 {
    10.0 / 3f64.sqrt() * delta.abs() / (duration * duration)
}

/// Phase list of the reversal maneuver.
pub fn maneuver_phases(spec: &ManeuverSpec) -> Vec<Phase> {
    vec![
        Phase {
            duration: spec.level_duration,
            target_bank: 0.0,
        },
        Phase {
            duration: spec.bank_duration,
            target_bank: spec.initial_bank,
        },
        Phase {
            duration: spec.hold_duration,
            target_bank: spec.initial_bank,
        },
        Phase {
            duration: spec.roll_duration,
            target_bank: spec.final_bank,
        },
        Phase {
            duration: spec.final_hold,
            target_bank: spec.final_bank,
        },
    ]
}

pub fn build_trajectory(spec: &ManeuverSpec) -> Result<Trajectory, SimError> {
    spec.validate()?;
    from_phases(0.0, &maneuver_phases(spec), spec.time_step)
}

/// Samples the phases every `dt` seconds; phase boundaries are always included.
pub fn from_phases(start_bank: f64, phases: &[Phase], dt: f64) -> Result<Trajectory, SimError> {
    if !(dt > 0.0) {
        return Err(SimError::Config(format!("time step must be positive, got {dt}")));
    }
    let mut segments = Vec::with_capacity(phases.len());
    let mut t = 0.0;
    let mut bank = start_bank.to_radians();
    let mut boundaries = vec![0.0];
    for p in phases {
        if !(p.duration >= 0.0 && p.duration.is_finite()) {
            return Err(SimError::Config(format!("phase duration must be nonnegative, got {}", p.duration)));
        }
        let target = p.target_bank.to_radians();
        if p.duration == 0.0 {
            if target != bank {
                return Err(SimError::Config("bank change in a zero-length phase".into()));
            }
            continue;
        }
        segments.push(Segment {
            start: t,
            duration: p.duration,
            from: bank,
            delta: target - bank,
        });
        t += p.duration;
        bank = target;
        boundaries.push(t);
    }
    let total = t;
    if segments.is_empty() {
        return Err(SimError::Config("maneuver has zero duration".into()));
    }
    let mut times: Vec<f64> = (0..)
        .map(|k| k as f64 * dt)
        .take_while(|v| *v < total - 1e-9 * dt)
        .collect();
    times.extend(boundaries.iter().cloned());
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * dt);

    let mut phi = Vec::with_capacity(times.len());
    let mut phi_dot = Vec::with_capacity(times.len());
    let mut phi_ddot = Vec::with_capacity(times.len());
    let mut seg = 0;
    for &tk in &times {
        while seg + 1 < segments.len() && tk >= segments[seg].start + segments[seg].duration {
            seg += 1;
        }
        let (a, b, c) = segments[seg].eval(tk);
        phi.push(a);
        phi_dot.push(b);
        phi_ddot.push(c);
    }
    Ok(Trajectory {
        time: times,
        phi,
        phi_dot,
        phi_ddot,
        boundaries,
    })
}
