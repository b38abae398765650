//! Interatomic pair potentials for sputtered-atom / gas-atom scattering.
//! Energies in eV, distances in m.

use crate::model::{read_two_column_csv, ModelError, PotentialConfig, Table1D};
use crate::units::COULOMB_EV_M;

use super::TransportError;

pub const SCREEN_HEADER: [&str; 2] = ["x", "psi"];

/// Coefficients and decay constants of the universal screening function.
pub const UNIVERSAL_SCREENING: [(f64, f64); 4] = [(0.1818, 3.2), (0.5099, 0.9423), (0.2802, 0.4028), (0.02817, 0.2016)];

/// Universal screening function `χ_U(x)`.
pub fn universal_screening(x: f64) -> f64 {
    UNIVERSAL_SCREENING.iter().map(|&(c, d)| c * (-d * x).exp()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialModel {
    /// `V_int` inside `r_σ`, zero outside
    HardSphere { radius: f64, strength: f64 },
    /// `A e^{-B r}` on `r_σ1 < r < r_σ2`, zero elsewhere
    BornMayer { a: f64, b: f64, r_inner: f64, r_outer: f64 },
    LennardJones { epsilon: f64, sigma: f64 },
    /// van der Waals tail plus screened Coulomb repulsion
    UniversalModified { epsilon: f64, sigma: f64, z1: u32, z2: u32 },
    /// screened Coulomb with a tabulated screen function `ψ(r/a)`
    Firsov { z1: u32, z2: u32, screening_length: f64, screen: Table1D },
    /// no interaction; used by the free-motion limits
    Zero,
}

fn positive(field: &str, v: f64) -> Result<(), ModelError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ModelError::invalid(format!("transport.potential.{field}"), "must be positive"))
    }
}

impl PotentialModel {
    /// Parameter checks that need no file access.
    pub fn validate_config(cfg: &PotentialConfig) -> Result<(), ModelError> {
        match cfg {
            PotentialConfig::HardSphere { radius, strength } => {
                positive("radius", *radius)?;
                if !strength.is_finite() {
                    return Err(ModelError::invalid("transport.potential.strength", "must be finite"));
                }
            }
            PotentialConfig::BornMayer { a, b, r_inner, r_outer } => {
                positive("b", *b)?;
                positive("r_inner", *r_inner)?;
                positive("r_outer", *r_outer)?;
                if !a.is_finite() {
                    return Err(ModelError::invalid("transport.potential.a", "must be finite"));
                }
                if r_inner >= r_outer {
                    return Err(ModelError::invalid("transport.potential.r_inner", "must be below r_outer"));
                }
            }
            PotentialConfig::LennardJones { epsilon, sigma } => {
                positive("epsilon", *epsilon)?;
                positive("sigma", *sigma)?;
            }
            PotentialConfig::UniversalModified { epsilon, sigma, z1, z2 } => {
                if !(*epsilon >= 0.0 && epsilon.is_finite()) {
                    return Err(ModelError::invalid("transport.potential.epsilon", "must be non-negative"));
                }
                positive("sigma", *sigma)?;
                if *z1 == 0 || *z2 == 0 {
                    return Err(ModelError::invalid("transport.potential.z1", "atomic numbers must be positive"));
                }
            }
            PotentialConfig::Firsov { z1, z2, screening_length, .. } => {
                positive("screening_length", *screening_length)?;
                if *z1 == 0 || *z2 == 0 {
                    return Err(ModelError::invalid("transport.potential.z1", "atomic numbers must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Builds the model, loading the Firsov screen table when needed.
    pub fn from_config(cfg: &PotentialConfig) -> Result<Self, TransportError> {
        Self::validate_config(cfg)?;
        Ok(match cfg {
            PotentialConfig::HardSphere { radius, strength } => {
                PotentialModel::HardSphere { radius: *radius, strength: *strength }
            }
            PotentialConfig::BornMayer { a, b, r_inner, r_outer } => {
                PotentialModel::BornMayer { a: *a, b: *b, r_inner: *r_inner, r_outer: *r_outer }
            }
            PotentialConfig::LennardJones { epsilon, sigma } => {
                PotentialModel::LennardJones { epsilon: *epsilon, sigma: *sigma }
            }
            PotentialConfig::UniversalModified { epsilon, sigma, z1, z2 } => {
                PotentialModel::UniversalModified { epsilon: *epsilon, sigma: *sigma, z1: *z1, z2: *z2 }
            }
            PotentialConfig::Firsov { z1, z2, screening_length, screen_table } => {
                let table = read_two_column_csv(screen_table, SCREEN_HEADER)?;
                Self::firsov(*z1, *z2, *screening_length, Table1D::new(table.rows)?)?
            }
        })
    }

    pub fn firsov(z1: u32, z2: u32, screening_length: f64, screen: Table1D) -> Result<Self, TransportError> {
        if screen.xs()[0] < 0.0 || screen.len() < 2 {
            return Err(TransportError::Potential("screen table needs at least two rows with x >= 0".into()));
        }
        positive("screening_length", screening_length)?;
        Ok(PotentialModel::Firsov { z1, z2, screening_length, screen: screen.non_negative()? })
    }

    /// `V(r)` in eV.
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            PotentialModel::HardSphere { radius, strength } => {
                if r < *radius {
                    *strength
                } else {
                    0.0
                }
            }
            PotentialModel::BornMayer { a, b, r_inner, r_outer } => {
                if r > *r_inner && r < *r_outer {
                    a * (-b * r).exp()
                } else {
                    0.0
                }
            }
            PotentialModel::LennardJones { epsilon, sigma } => {
                let s6 = (sigma / r).powi(6);
                4.0 * epsilon * (s6 * s6 - s6)
            }
            PotentialModel::UniversalModified { epsilon, sigma, z1, z2 } => {
                let zz = (*z1 * *z2) as f64;
                let x = r * ((*z1 as f64).powf(0.23) + (*z2 as f64).powf(0.23)) / (0.89 * sigma);
                -4.0 * epsilon * (sigma / r).powi(6) + zz * COULOMB_EV_M / r * universal_screening(x)
            }
            PotentialModel::Firsov { z1, z2, screening_length, screen } => {
                let zz = (*z1 * *z2) as f64;
                let x = r / screening_length;
                // past the table the screen is taken as fully closed
                let psi = if x > screen.xs()[screen.len() - 1] { 0.0 } else { screen.eval(x) };
                zz * COULOMB_EV_M / r * psi
            }
            PotentialModel::Zero => 0.0,
        }
    }

    /// Characteristic interaction range, used to bracket roots and cap ρ_max.
    pub fn length_scale(&self) -> f64 {
        match self {
            PotentialModel::HardSphere { radius, .. } => *radius,
            PotentialModel::BornMayer { r_outer, .. } => *r_outer,
            PotentialModel::LennardJones { sigma, .. } | PotentialModel::UniversalModified { sigma, .. } => *sigma,
            PotentialModel::Firsov { screening_length, screen, .. } => {
                screening_length * screen.xs()[screen.len() - 1].max(1.0)
            }
            PotentialModel::Zero => 1e-10,
        }
    }

    /// Radii where `V` jumps; the deflection quadrature splits there.
    pub fn discontinuities(&self) -> Vec<f64> {
        match self {
            PotentialModel::HardSphere { radius, .. } => vec![*radius],
            PotentialModel::BornMayer { r_inner, r_outer, .. } => vec![*r_inner, *r_outer],
            PotentialModel::Firsov { screening_length, screen, .. } => {
                vec![screening_length * screen.xs()[screen.len() - 1]]
            }
            _ => Vec::new(),
        }
    }

    /// Whether `V` never decreases as `r` shrinks.
    pub fn is_repulsive(&self) -> bool {
        match self {
            PotentialModel::HardSphere { strength, .. } => *strength >= 0.0,
            PotentialModel::UniversalModified { epsilon, .. } => *epsilon == 0.0,
            PotentialModel::Firsov { .. } | PotentialModel::Zero => true,
            _ => false,
        }
    }
}
