use serde::{Deserialize, Serialize};

use super::{ModelError, Species};
use crate::units::BOLTZMANN;
use crate::Vec3;

/// Cylindrical process chamber, axis along `z`. The target sits on the
/// `z = target_z` plane, the substrate is a disk on `z = substrate_z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Chamber {
    pub radius: f64,
    pub height: f64,
    #[serde(default)]
    pub target_z: f64,
    pub target_radius: f64,
    pub substrate_z: f64,
    pub substrate_radius: f64,
}

impl Default for Chamber {
    fn default() -> Self {
        Chamber {
            radius: 0.1,
            height: 0.1,
            target_z: 0.0,
            target_radius: 0.05,
            substrate_z: 0.08,
            substrate_radius: 0.05,
        }
    }
}

impl Chamber {
    pub fn contains(&self, p: &Vec3) -> bool {
        let r = p.x.hypot(p.y);
        r <= self.radius * (1.0 + 1e-12) && p.z >= self.target_z - 1e-12 && p.z <= self.target_z + self.height + 1e-12
    }

    pub fn top_z(&self) -> f64 {
        self.target_z + self.height
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let field = |f: &str, reason: &str| Err(ModelError::invalid(format!("chamber.{f}"), reason));
        if !(self.radius > 0.0) {
            return field("radius", "must be positive");
        }
        if !(self.height > 0.0) {
            return field("height", "must be positive");
        }
        if !(self.target_radius > 0.0 && self.target_radius <= self.radius) {
            return field("target_radius", "must lie in (0, radius]");
        }
        if !(self.substrate_radius > 0.0 && self.substrate_radius <= self.radius) {
            return field("substrate_radius", "must lie in (0, radius]");
        }
        if !(self.substrate_z > self.target_z && self.substrate_z <= self.top_z()) {
            return field("substrate_z", "must lie above the target and inside the chamber");
        }
        Ok(())
    }
}

/// Gas temperature: a single value or a per-cell map on a uniform
/// `nr × nz` cell grid covering the chamber (row-major, `r` fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TemperatureField {
    Uniform(f64),
    Map { nr: usize, nz: usize, values: Vec<f64> },
}

impl TemperatureField {
    fn values(&self) -> &[f64] {
        match self {
            TemperatureField::Uniform(t) => std::slice::from_ref(t),
            TemperatureField::Map { values, .. } => values,
        }
    }

    pub fn min(&self) -> f64 {
        self.values().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values().iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Temperatures outside this window are accepted with a warning.
pub const TEMPERATURE_WINDOW_K: (f64, f64) = (300.0, 900.0);

/// Background gas, modeled as ideal at uniform pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct GasState {
    pub pressure: f64,
    pub temperature: TemperatureField,
    pub species: Species,
    pub chamber: Chamber,
}

impl GasState {
    pub fn new(pressure: f64, temperature: TemperatureField, species: Species, chamber: Chamber) -> Result<Self, ModelError> {
        if !(pressure > 0.0 && pressure.is_finite()) {
            return Err(ModelError::invalid("gas.pressure", "must be positive"));
        }
        if let TemperatureField::Map { nr, nz, values } = &temperature {
            if *nr == 0 || *nz == 0 || values.len() != nr * nz {
                return Err(ModelError::invalid("gas.temperature", "map needs nr*nz values"));
            }
        }
        if !(temperature.min() > 0.0 && temperature.max().is_finite()) {
            return Err(ModelError::invalid("gas.temperature", "must be positive"));
        }
        let (lo, hi) = TEMPERATURE_WINDOW_K;
        if temperature.min() < lo || temperature.max() > hi {
            log::warn!("gas temperature outside the {lo}-{hi} K range typical of magnetron discharges");
        }
        if species.is_charged() {
            return Err(ModelError::invalid("gas.species", "background gas must be neutral"));
        }
        Ok(GasState { pressure, temperature, species, chamber })
    }

    /// Uniform argon at `pressure` Pa and `temperature` K in the default chamber.
    pub fn uniform_argon(pressure: f64, temperature: f64) -> Result<Self, ModelError> {
        Self::new(pressure, TemperatureField::Uniform(temperature), Species::argon(), Chamber::default())
    }

    pub fn with_chamber(mut self, chamber: Chamber) -> Self {
        self.chamber = chamber;
        self
    }

    /// Temperature of the cell containing `p`. Points are clamped to the
    /// chamber; use [`GasState::gas_density`] for checked access.
    pub fn temperature_at(&self, p: &Vec3) -> f64 {
        match &self.temperature {
            TemperatureField::Uniform(t) => *t,
            TemperatureField::Map { nr, nz, values } => {
                let c = &self.chamber;
                let fr = (p.x.hypot(p.y) / c.radius).clamp(0.0, 1.0);
                let fz = ((p.z - c.target_z) / c.height).clamp(0.0, 1.0);
                let i = ((fr * *nr as f64) as usize).min(nr - 1);
                let j = ((fz * *nz as f64) as usize).min(nz - 1);
                values[j * nr + i]
            }
        }
    }

    pub fn density_at(&self, p: &Vec3) -> f64 {
        self.pressure / (BOLTZMANN * self.temperature_at(p))
    }

    /// Ideal-gas number density `p/(k_B T)` in m⁻³ at `point`.
    pub fn gas_density(&self, point: &Vec3) -> Result<f64, ModelError> {
        if !self.chamber.contains(point) {
            return Err(ModelError::OutsideChamber(*point));
        }
        Ok(self.density_at(point))
    }

    /// Densest cell; bounds collision rates anywhere in the chamber.
    pub fn max_density(&self) -> f64 {
        self.pressure / (BOLTZMANN * self.temperature.min())
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.temperature, TemperatureField::Uniform(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_gas_density_at_one_pascal() {
        let g = GasState::uniform_argon(1.0, 300.0).unwrap();
        let n = g.gas_density(&Vec3::new(0.01, 0.0, 0.02)).unwrap();
        // p/(k_B T) = 1 / (1.380649e-23 * 300)
        assert!((n - 2.414_e20).abs() / 2.414e20 < 1e-3);
        let hot = GasState::uniform_argon(1.0, 900.0).unwrap();
        let n_hot = hot.gas_density(&Vec3::new(0.01, 0.0, 0.02)).unwrap();
        assert!((n_hot * 3.0 - n).abs() / n < 1e-14);
    }

    #[test]
    fn uniform_density_everywhere() {
        let g = GasState::uniform_argon(0.5, 300.0).unwrap();
        let a = g.gas_density(&Vec3::new(0.0, 0.0, 0.0)).unwrap();
        let b = g.gas_density(&Vec3::new(0.05, -0.03, 0.09)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn outside_point_rejected() {
        let g = GasState::uniform_argon(1.0, 300.0).unwrap();
        assert!(g.gas_density(&Vec3::new(0.2, 0.0, 0.05)).is_err());
        assert!(g.gas_density(&Vec3::new(0.0, 0.0, -0.01)).is_err());
    }

    #[test]
    fn rejects_bad_pressure_and_map() {
        assert!(GasState::uniform_argon(-1.0, 300.0).is_err());
        assert!(GasState::uniform_argon(0.0, 300.0).is_err());
        let bad_map = TemperatureField::Map { nr: 2, nz: 2, values: vec![300.0; 3] };
        assert!(GasState::new(1.0, bad_map, Species::argon(), Chamber::default()).is_err());
        assert!(GasState::new(1.0, TemperatureField::Uniform(300.0), Species::argon_ion(), Chamber::default()).is_err());
    }

    #[test]
    fn ideal_gas_law_holds_cellwise() {
        let values: Vec<f64> = (0..12).map(|i| 300.0 + 50.0 * i as f64).collect();
        let g = GasState::new(1.3, TemperatureField::Map { nr: 4, nz: 3, values }, Species::argon(), Chamber::default())
            .unwrap();
        for j in 0..3 {
            for i in 0..4 {
                let p = Vec3::new((i as f64 + 0.5) * 0.1 / 4.0, 0.0, (j as f64 + 0.5) * 0.1 / 3.0);
                let n = g.gas_density(&p).unwrap();
                let t = g.temperature_at(&p);
                assert_eq!(t, 300.0 + 50.0 * (j * 4 + i) as f64);
                assert!((n * BOLTZMANN * t - 1.3).abs() <= 4.0 * f64::EPSILON * 1.3);
            }
        }
        // rarefaction: hotter cells are less dense
        assert!(g.density_at(&Vec3::new(0.09, 0.0, 0.09)) < g.density_at(&Vec3::new(0.001, 0.0, 0.001)));
    }
}
