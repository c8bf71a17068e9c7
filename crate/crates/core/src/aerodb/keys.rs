use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::AeroError;

/// Baseline aerodynamic coefficient or stability derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coefficient {
    /// C_L
    Lift,
    /// C_D
    Drag,
    /// C_SF
    SideForce,
    /// C_l
    Rolling,
    /// C_m
    Pitching,
    /// C_n
    Yawing,
    /// C_mq
    PitchDamping,
    /// C_lp
    RollDamping,
    /// C_lr
    RollDueToYawRate,
    /// C_np
    YawDueToRollRate,
    /// C_nr
    YawDamping,
}

impl Coefficient {
    pub const ALL: [Coefficient; 11] = [
        Coefficient::Lift,
        Coefficient::Drag,
        Coefficient::SideForce,
        Coefficient::Rolling,
        Coefficient::Pitching,
        Coefficient::Yawing,
        Coefficient::PitchDamping,
        Coefficient::RollDamping,
        Coefficient::RollDueToYawRate,
        Coefficient::YawDueToRollRate,
        Coefficient::YawDamping,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Coefficient::Lift => "CL",
            Coefficient::Drag => "CD",
            Coefficient::SideForce => "CSF",
            Coefficient::Rolling => "Cl",
            Coefficient::Pitching => "Cm",
            Coefficient::Yawing => "Cn",
            Coefficient::PitchDamping => "Cmq",
            Coefficient::RollDamping => "Clp",
            Coefficient::RollDueToYawRate => "Clr",
            Coefficient::YawDueToRollRate => "Cnp",
            Coefficient::YawDamping => "Cnr",
        }
    }

    pub fn is_stability_derivative(self) -> bool {
        self as usize >= Coefficient::PitchDamping as usize
    }

    pub fn is_moment(self) -> bool {
        matches!(self, Coefficient::Rolling | Coefficient::Pitching | Coefficient::Yawing)
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Control surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Surface {
    Aileron,
    Elevator,
    Rudder,
    Flap,
    Spoiler,
}

impl Surface {
    pub const ALL: [Surface; 5] = [
        Surface::Aileron,
        Surface::Elevator,
        Surface::Rudder,
        Surface::Flap,
        Surface::Spoiler,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Surface::Aileron => "aileron",
            Surface::Elevator => "elevator",
            Surface::Rudder => "rudder",
            Surface::Flap => "flap",
            Surface::Spoiler => "spoiler",
        }
    }

    /// Coefficients whose increments this surface contributes.
    pub fn affects(self, c: Coefficient) -> bool {
        match self {
            Surface::Flap => !c.is_stability_derivative(),
            _ => c.is_moment(),
        }
    }
}

impl FromStr for Surface {
    type Err = AeroError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Surface::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| AeroError::UnknownKey(s.to_string()))
    }
}

/// Independent variable of a coefficient table (degrees).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Input {
    Alpha,
    Beta,
    Delta,
}

impl Input {
    pub fn column(self) -> &'static str {
        match self {
            Input::Alpha => "alpha",
            Input::Beta => "beta",
            Input::Delta => "delta",
        }
    }
}

/// A baseline coefficient, or its increment due to one control surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CoefficientKey {
    base: Coefficient,
    surface: Option<Surface>,
}

impl CoefficientKey {
    pub fn base(base: Coefficient) -> Self {
        Self { base, surface: None }
    }

    pub fn increment(base: Coefficient, surface: Surface) -> Result<Self, AeroError> {
        if !surface.affects(base) {
            return Err(AeroError::UnknownKey(format!("{}_{}", base.symbol(), surface.name())));
        }
        Ok(Self {
            base,
            surface: Some(surface),
        })
    }

    pub fn coefficient(&self) -> Coefficient {
        self.base
    }

    pub fn surface(&self) -> Option<Surface> {
        self.surface
    }

    pub fn is_increment(&self) -> bool {
        self.surface.is_some()
    }

    /// Ordered inputs of the table for this key.
    pub fn signature(&self) -> &'static [Input] {
        match (self.surface, self.base.is_stability_derivative()) {
            (Some(Surface::Elevator), _) => &[Input::Alpha, Input::Delta],
            (Some(_), _) => &[Input::Alpha, Input::Beta, Input::Delta],
            (None, true) => &[Input::Alpha],
            (None, false) => &[Input::Alpha, Input::Beta],
        }
    }

    /// Stable small integer, used to derive per-coefficient random streams.
    pub fn ordinal(&self) -> u64 {
        let b = self.base.index() as u64;
        match self.surface {
            None => b,
            Some(s) => 11 + 11 * s as u64 + b,
        }
    }

    /// Position of the deflection among the inputs, if any.
    pub fn delta_column(&self) -> Option<usize> {
        self.signature().iter().position(|i| *i == Input::Delta)
    }

    /// Maps a flight condition onto this key's signature.
    pub fn point(&self, alpha: f64, beta: f64, delta: f64) -> Vec<f64> {
        self.signature()
            .iter()
            .map(|i| match i {
                Input::Alpha => alpha,
                Input::Beta => beta,
                Input::Delta => delta,
            })
            .collect()
    }
}

/// The keys the flight simulator reads: all eleven aerodynamic coefficients
/// and the moment increments of the aileron, elevator and rudder.
pub fn simulator_keys() -> Vec<CoefficientKey> {
    let mut keys: Vec<CoefficientKey> = Coefficient::ALL.into_iter().map(CoefficientKey::base).collect();
    for s in [Surface::Aileron, Surface::Elevator, Surface::Rudder] {
        for c in [Coefficient::Rolling, Coefficient::Pitching, Coefficient::Yawing] {
            keys.push(CoefficientKey {
                base: c,
                surface: Some(s),
            });
        }
    }
    keys
}

impl fmt::Display for CoefficientKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.surface {
            None => f.write_str(self.base.symbol()),
            Some(s) => write!(f, "{}_{}", self.base.symbol(), s.name()),
        }
    }
}

impl FromStr for CoefficientKey {
    type Err = AeroError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, surface) = match s.split_once('_') {
            Some((h, t)) => (h, Some(t.parse::<Surface>()?)),
            None => (s, None),
        };
        let base = Coefficient::ALL
            .into_iter()
            .find(|c| c.symbol() == head)
            .ok_or_else(|| AeroError::UnknownKey(s.to_string()))?;
        match surface {
            None => Ok(Self::base(base)),
            Some(surf) => Self::increment(base, surf),
        }
    }
}

impl TryFrom<String> for CoefficientKey {
    type Error = AeroError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<CoefficientKey> for String {
    fn from(k: CoefficientKey) -> Self {
        k.to_string()
    }
}
