use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Handbook Young's moduli used when a config does not override them.
pub const PLYWOOD_MODULUS: f64 = 9.0e9;
pub const ALUMINIUM_MODULUS: f64 = 69.0e9;
pub const FOAM_MODULUS: f64 = 0.5e6;
/// Winkler foundation modulus of the foam board, Pa/m.
pub const FOAM_FOUNDATION_MODULUS: f64 = 1.0e5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaterialKind {
    Wood,
    Aluminium,
    Foam,
}

impl FromStr for MaterialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wood" | "plywood" => Ok(MaterialKind::Wood),
            "aluminium" | "aluminum" => Ok(MaterialKind::Aluminium),
            "foam" => Ok(MaterialKind::Foam),
            other => Err(Error::InvalidParameter(format!("unknown material '{other}'"))),
        }
    }
}

impl fmt::Display for MaterialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaterialKind::Wood => "wood",
            MaterialKind::Aluminium => "aluminium",
            MaterialKind::Foam => "foam",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    pub kind: MaterialKind,
    /// Pa
    pub young_modulus: f64,
    /// Pa/m, foam only
    pub foundation_modulus: Option<f64>,
}

impl MaterialSpec {
    pub fn wood() -> Self {
        MaterialSpec {
            kind: MaterialKind::Wood,
            young_modulus: PLYWOOD_MODULUS,
            foundation_modulus: None,
        }
    }

    pub fn aluminium() -> Self {
        MaterialSpec {
            kind: MaterialKind::Aluminium,
            young_modulus: ALUMINIUM_MODULUS,
            foundation_modulus: None,
        }
    }

    pub fn foam() -> Self {
        MaterialSpec {
            kind: MaterialKind::Foam,
            young_modulus: FOAM_MODULUS,
            foundation_modulus: Some(FOAM_FOUNDATION_MODULUS),
        }
    }

    pub fn default_for(kind: MaterialKind) -> Self {
        match kind {
            MaterialKind::Wood => Self::wood(),
            MaterialKind::Aluminium => Self::aluminium(),
            MaterialKind::Foam => Self::foam(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.young_modulus > 0.0 && self.young_modulus.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "{}: Young's modulus must be positive",
                self.kind
            )));
        }
        match (self.kind, self.foundation_modulus) {
            (MaterialKind::Foam, Some(k)) if k > 0.0 && k.is_finite() => Ok(()),
            (MaterialKind::Foam, _) => Err(Error::InvalidParameter(
                "foam needs a positive foundation modulus".into(),
            )),
            (_, Some(k)) if !(k > 0.0) => Err(Error::InvalidParameter(
                "foundation modulus must be positive".into(),
            )),
            _ => Ok(()),
        }
    }
}
