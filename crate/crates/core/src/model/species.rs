use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::units::{AMU, ELECTRON_MASS, ELEMENTARY_CHARGE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeciesKind {
    Electron,
    Ion,
    Neutral,
    SputteredAtom,
}

/// A particle species. Masses in kg, charges in C.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Species {
    pub name: String,
    pub mass: f64,
    pub charge: f64,
    pub kind: SpeciesKind,
    /// Atomic number, needed by the screened-Coulomb potentials.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atomic_number: Option<u32>,
}

impl Species {
    pub fn new(
        name: impl Into<String>,
        mass: f64,
        charge: f64,
        kind: SpeciesKind,
        atomic_number: Option<u32>,
    ) -> Result<Self, ModelError> {
        let s = Species { name: name.into(), mass, charge, kind, atomic_number };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |reason: &str| {
            Err(ModelError::InvalidSpecies { name: self.name.clone(), reason: reason.to_string() })
        };
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return bad("mass must be positive");
        }
        match self.kind {
            SpeciesKind::Electron if (self.charge + ELEMENTARY_CHARGE).abs() > 1e-6 * ELEMENTARY_CHARGE => {
                bad("electrons carry charge -e")
            }
            SpeciesKind::Neutral | SpeciesKind::SputteredAtom if self.charge != 0.0 => {
                bad("neutral species carry no charge")
            }
            SpeciesKind::Ion if self.charge == 0.0 => bad("ions must be charged"),
            _ => Ok(()),
        }
    }

    pub fn electron() -> Self {
        Species {
            name: "e".into(),
            mass: ELECTRON_MASS,
            charge: -ELEMENTARY_CHARGE,
            kind: SpeciesKind::Electron,
            atomic_number: None,
        }
    }

    /// Singly charged positive ion of an element with mass `amu`.
    pub fn ion(name: impl Into<String>, amu: f64, atomic_number: u32) -> Self {
        Species {
            name: name.into(),
            mass: amu * AMU - ELECTRON_MASS,
            charge: ELEMENTARY_CHARGE,
            kind: SpeciesKind::Ion,
            atomic_number: Some(atomic_number),
        }
    }

    pub fn neutral(name: impl Into<String>, amu: f64, atomic_number: u32) -> Self {
        Species {
            name: name.into(),
            mass: amu * AMU,
            charge: 0.0,
            kind: SpeciesKind::Neutral,
            atomic_number: Some(atomic_number),
        }
    }

    pub fn sputtered(name: impl Into<String>, amu: f64, atomic_number: u32) -> Self {
        Species { kind: SpeciesKind::SputteredAtom, ..Self::neutral(name, amu, atomic_number) }
    }

    pub fn argon() -> Self {
        Self::neutral("Ar", 39.948, 18)
    }

    pub fn argon_ion() -> Self {
        Self::ion("Ar+", 39.948, 18)
    }

    pub fn copper() -> Self {
        Self::sputtered("Cu", 63.546, 29)
    }

    pub fn is_charged(&self) -> bool {
        self.charge != 0.0
    }
}
