use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SimError;

/// Standard gravity (m/s²).
pub const G: f64 = 9.80665;

fn d_initial_bank() -> f64 {
    30.0
}
fn d_final_bank() -> f64 {
    -30.0
}
fn d_roll_duration() -> f64 {
    11.0
}
fn d_level() -> f64 {
    1.0
}
fn d_bank() -> f64 {
    10.0
}
fn d_hold() -> f64 {
    5.0
}
fn d_final_hold() -> f64 {
    3.0
}
fn d_time_step() -> f64 {
    0.05
}

/// Bank-reversal maneuver. Angles in degrees, times in seconds.
///
/// Phases: level flight, roll to `initial_bank`, hold, reversal to
/// `final_bank` over `roll_duration`, final hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManeuverSpec {
    /// True airspeed (m/s); no default.
    pub airspeed: f64,
    #[serde(default = "d_initial_bank")]
    pub initial_bank: f64,
    #[serde(default = "d_final_bank")]
    pub final_bank: f64,
    #[serde(default = "d_roll_duration")]
    pub roll_duration: f64,
    #[serde(default = "d_level")]
    pub level_duration: f64,
    #[serde(default = "d_bank")]
    pub bank_duration: f64,
    #[serde(default = "d_hold")]
    pub hold_duration: f64,
    #[serde(default = "d_final_hold")]
    pub final_hold: f64,
    #[serde(default = "d_time_step")]
    pub time_step: f64,
}

impl ManeuverSpec {
    /// ±30° reversal in 11 s with the default lead-in phases.
    pub fn standard(airspeed: f64) -> Self {
        Self {
            airspeed,
            initial_bank: d_initial_bank(),
            final_bank: d_final_bank(),
            roll_duration: d_roll_duration(),
            level_duration: d_level(),
            bank_duration: d_bank(),
            hold_duration: d_hold(),
            final_hold: d_final_hold(),
            time_step: d_time_step(),
        }
    }

    /// The same maneuver flown to the opposite side.
    pub fn mirrored(&self) -> Self {
        Self {
            initial_bank: -self.initial_bank,
            final_bank: -self.final_bank,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.airspeed.is_finite() && self.airspeed > 0.0) {
            return Err(SimError::Config(format!("airspeed must be positive, got {}", self.airspeed)));
        }
        if !(self.roll_duration > 0.0) {
            return Err(SimError::Config(format!(
                "roll duration must be positive, got {}",
                self.roll_duration
            )));
        }
        for (name, v) in [
            ("level_duration", self.level_duration),
            ("bank_duration", self.bank_duration),
            ("hold_duration", self.hold_duration),
            ("final_hold", self.final_hold),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(SimError::Config(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if self.bank_duration == 0.0 && self.initial_bank != 0.0 {
            return Err(SimError::Config("bank_duration must be positive to establish the initial bank".into()));
        }
        if !(self.time_step > 0.0 && self.time_step.is_finite()) {
            return Err(SimError::Config(format!("time step must be positive, got {}", self.time_step)));
        }
        for b in [self.initial_bank, self.final_bank] {
            if !(b.abs() < 90.0) {
                return Err(SimError::Config(format!("bank angle {b} outside (-90, 90)")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EngineStatus {
    #[default]
    Nominal,
    RightOut,
    LeftOut,
}

fn d_thrust() -> f64 {
    61_300.0
}
fn d_arm() -> f64 {
    1.5
}

/// Twin aft-mounted engines, one on each side of the centerline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    /// Thrust of one engine (N).
    #[serde(default = "d_thrust")]
    pub thrust_per_engine: f64,
    /// Lateral distance of each engine from the centerline (m).
    #[serde(default = "d_arm")]
    pub lateral_arm: f64,
    #[serde(default)]
    pub status: EngineStatus,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            thrust_per_engine: d_thrust(),
            lateral_arm: d_arm(),
            status: EngineStatus::Nominal,
        }
    }
}

impl EngineConfig {
    pub fn with_status(self, status: EngineStatus) -> Self {
        Self { status, ..self }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.thrust_per_engine >= 0.0) {
            return Err(SimError::Config(format!("thrust must be nonnegative, got {}", self.thrust_per_engine)));
        }
        if !(self.lateral_arm > 0.0) {
            return Err(SimError::Config(format!("engine arm must be positive, got {}", self.lateral_arm)));
        }
        Ok(())
    }

    /// Body-axis yawing moment (N·m) of the running engines. An engine at
    /// lateral position `y` (positive right) contributes `−y·T`.
    pub fn yaw_moment(&self) -> f64 {
        let (left, right) = match self.status {
            EngineStatus::Nominal => (true, true),
            EngineStatus::RightOut => (true, false),
            EngineStatus::LeftOut => (false, true),
        };
        let t = self.thrust_per_engine;
        let a = self.lateral_arm;
        let mut n = 0.0;
        if left {
            n += a * t;
        }
        if right {
            n -= a * t;
        }
        n
    }
}

fn d_aileron() -> f64 {
    25.0
}
fn d_elevator() -> f64 {
    20.0
}
fn d_rudder() -> f64 {
    30.0
}

/// Maximum allowable deflection magnitude per surface (degrees).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeflectionLimits {
    #[serde(default = "d_aileron")]
    pub aileron: f64,
    #[serde(default = "d_elevator")]
    pub elevator: f64,
    #[serde(default = "d_rudder")]
    pub rudder: f64,
}

impl Default for DeflectionLimits {
    fn default() -> Self {
        Self {
            aileron: d_aileron(),
            elevator: d_elevator(),
            rudder: d_rudder(),
        }
    }
}

impl DeflectionLimits {
    /// Tightened limits used to provoke failures: ailerons ±15°, elevator ±20°, rudder ±20°.
    pub fn restricted() -> Self {
        Self {
            aileron: 15.0,
            elevator: 20.0,
            rudder: 20.0,
        }
    }
}

fn d_density() -> f64 {
    1.225
}

/// Everything a simulation needs besides the database sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub maneuver: ManeuverSpec,
    #[serde(default)]
    pub engines: EngineConfig,
    #[serde(default)]
    pub limits: DeflectionLimits,
    /// Air density (kg/m³), constant.
    #[serde(default = "d_density")]
    pub density: f64,
}

impl SimConfig {
    pub fn new(maneuver: ManeuverSpec) -> Self {
        Self {
            maneuver,
            engines: EngineConfig::default(),
            limits: DeflectionLimits::default(),
            density: d_density(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.maneuver.validate()?;
        self.engines.validate()?;
        if !(self.density > 0.0) {
            return Err(SimError::Config(format!("density must be positive, got {}", self.density)));
        }
        Ok(())
    }

    /// Parses and validates a TOML configuration.
    pub fn parse(text: &str, path: &Path) -> Result<Self, crate::Error> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| crate::Error::Config {
            path: path.display().to_string(),
            msg: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, crate::Error> {
        let text = std::fs::read_to_string(path).map_err(|source| crate::io::IoError::File {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn dynamic_pressure(&self) -> f64 {
        0.5 * self.density * self.maneuver.airspeed * self.maneuver.airspeed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn engine_out_yaw_moment() {
        let e = EngineConfig {
            thrust_per_engine: 50_000.0,
            lateral_arm: 2.0,
            status: EngineStatus::Nominal,
        };
        assert_eq!(e.yaw_moment(), 0.0);
        assert_eq!(e.with_status(EngineStatus::RightOut).yaw_moment(), 100_000.0);
        assert_eq!(e.with_status(EngineStatus::LeftOut).yaw_moment(), -100_000.0);
    }

    #[test]
    fn toml_defaults() {
        let cfg: SimConfig = toml::from_str("[maneuver]\nairspeed = 80.0\n[engines]\nstatus = \"right_out\"\n").unwrap();
        assert_eq!(cfg.maneuver, ManeuverSpec::standard(80.0));
        assert_eq!(cfg.engines.status, EngineStatus::RightOut);
        assert_eq!(cfg.limits, DeflectionLimits::default());
        assert!(toml::from_str::<SimConfig>("[maneuver]\ntime_step = 0.1\n").is_err());
        let bad = "[maneuver]\nairspeed = 80.0\n[limits]\nflaps = 3.0\n";
        assert!(SimConfig::parse(bad, Path::new("sim.toml")).is_err());
        let neg = "[maneuver]\nairspeed = -1.0\n";
        assert!(matches!(SimConfig::parse(neg, Path::new("sim.toml")), Err(crate::Error::Sim(_))));
    }

    #[test]
    fn validation() {
        let mut m = ManeuverSpec::standard(80.0);
        assert!(m.validate().is_ok());
        m.roll_duration = 0.0;
        assert!(m.validate().is_err());
        let mut m = ManeuverSpec::standard(-1.0);
        assert!(m.validate().is_err());
        m.airspeed = 50.0;
        m.time_step = 0.0;
        assert!(m.validate().is_err());
    }
}
