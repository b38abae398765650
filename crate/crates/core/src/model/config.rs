//! Run configuration (TOML). Every section has defaults, so a file holding
//! only `schema_version = 1` is a valid configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Chamber, ModelError, Species, SpeciesKind, TemperatureField};
use crate::units::AMU;

pub const SCHEMA_VERSION: u32 = 1;

/// Applied voltages outside this band are accepted with a warning.
pub const VOLTAGE_BAND_V: (f64, f64) = (200.0, 400.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub schema_version: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub chamber: Chamber,
    #[serde(default)]
    pub gas: GasConfig,
    #[serde(default)]
    pub discharge: DischargeConfig,
    #[serde(default)]
    pub magnets: MagnetConfig,
    #[serde(default)]
    pub plasma: PlasmaConfig,
    #[serde(default)]
    pub sputter: SputterConfig,
    #[serde(default)]
    pub transport: TransportConfig,
    #[serde(default)]
    pub deposition: DepositionConfig,
}

fn default_seed() -> u64 {
    1
}

/// An element given by name, mass and atomic number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementConfig {
    pub name: String,
    pub mass_amu: f64,
    pub atomic_number: u32,
}

impl ElementConfig {
    fn validate(&self, field: &str) -> Result<(), ModelError> {
        if !(self.mass_amu > 0.0) {
            return Err(ModelError::invalid(format!("{field}.mass_amu"), "must be positive"));
        }
        if self.atomic_number == 0 {
            return Err(ModelError::invalid(format!("{field}.atomic_number"), "must be at least 1"));
        }
        Ok(())
    }

    pub fn mass(&self) -> f64 {
        self.mass_amu * AMU
    }

    pub fn neutral(&self) -> Species {
        Species::neutral(self.name.clone(), self.mass_amu, self.atomic_number)
    }

    pub fn sputtered(&self) -> Species {
        Species { kind: SpeciesKind::SputteredAtom, ..self.neutral() }
    }

    pub fn ion(&self) -> Species {
        Species::ion(format!("{}+", self.name), self.mass_amu, self.atomic_number)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GasConfig {
    /// Pa
    pub pressure: f64,
    /// K, scalar or `{ nr, nz, values }`
    pub temperature: TemperatureField,
    pub element: ElementConfig,
}

impl Default for GasConfig {
    fn default() -> Self {
        GasConfig {
            pressure: 1.0,
            temperature: TemperatureField::Uniform(300.0),
            element: ElementConfig { name: "Ar".into(), mass_amu: 39.948, atomic_number: 18 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DischargeConfig {
    /// V, magnitude of the cathode bias
    pub applied_voltage: f64,
    /// m; required by the plasma stage, no default
    pub sheath_thickness: Option<f64>,
    /// V
    pub presheath_drop: f64,
    /// secondary-electron yield γ; required by the plasma stage, no default
    pub secondary_yield: Option<f64>,
    /// V/m amplitude of the optional random azimuthal field; 0 disables it
    pub turbulent_field: f64,
}

impl Default for DischargeConfig {
    fn default() -> Self {
        DischargeConfig {
            applied_voltage: 300.0,
            sheath_thickness: None,
            presheath_drop: 0.0,
            secondary_yield: None,
            turbulent_field: 0.0,
        }
    }
}

/// Coaxial current loop standing in for a ring magnet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopConfig {
    /// m
    pub radius: f64,
    /// m, axial position
    pub z: f64,
    /// A·turns
    pub current: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MagnetConfig {
    pub loops: Vec<LoopConfig>,
    /// CSV `r,z,Br,Bz,Atheta`; replaces the loops when given
    pub field_map: Option<PathBuf>,
}

impl Default for MagnetConfig {
    fn default() -> Self {
        // inner and outer rings of opposite polarity, ~200 G over the racetrack
        MagnetConfig {
            loops: vec![
                LoopConfig { radius: 0.01, z: -0.01, current: -600.0 },
                LoopConfig { radius: 0.04, z: -0.01, current: 1100.0 },
            ],
            field_map: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlasmaBackend {
    Kinetic,
    Fluid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldModel {
    /// analytic Child's-law sheath plus uniform pre-sheath
    Sheath,
    /// self-consistent implicit electrostatic PIC
    Pic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrossSectionFiles {
    pub electron_elastic: Option<PathBuf>,
    pub electron_ionization: Option<PathBuf>,
    pub electron_excitation: Option<PathBuf>,
    pub ion_elastic: Option<PathBuf>,
    pub ion_charge_exchange: Option<PathBuf>,
}

impl Default for CrossSectionFiles {
    fn default() -> Self {
        CrossSectionFiles {
            electron_elastic: Some("data/cross_sections/e_ar_elastic.csv".into()),
            electron_ionization: Some("data/cross_sections/e_ar_ionization.csv".into()),
            electron_excitation: Some("data/cross_sections/e_ar_excitation.csv".into()),
            ion_elastic: Some("data/cross_sections/arp_ar_elastic.csv".into()),
            ion_charge_exchange: Some("data/cross_sections/arp_ar_cx.csv".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlasmaConfig {
    pub backend: PlasmaBackend,
    pub field_model: FieldModel,
    /// s, electron time step
    pub dt: f64,
    /// implicitness parameter in [1/2, 1]
    pub theta: f64,
    pub steps: usize,
    /// ions are pushed every `ion_subcycle` electron steps
    pub ion_subcycle: usize,
    /// initial electron macro-particles
    pub macro_particles: usize,
    /// hard cap on live macro-particles; newborn particles beyond it are merged by weight
    pub max_macro_particles: usize,
    /// m⁻³, physical density represented by the initial macro-particles
    pub electron_density: f64,
    /// eV, initial electron temperature
    pub electron_temperature: f64,
    /// m, thickness of the initial electron slab above the target
    pub seed_region_height: f64,
    pub ions_magnetized: bool,
    /// guard on ω·Δt
    pub max_rotation_per_step: f64,
    /// guard on ν_max·Δt
    pub max_collision_probability: f64,
    pub grid_nr: usize,
    pub grid_nz: usize,
    /// geometric growth of the axial spacing away from the cathode; 1 = uniform
    pub grid_stretch: f64,
    /// fine-grid zone height near the cathode, m
    pub fine_zone: f64,
    pub poisson_tolerance: f64,
    pub poisson_max_iterations: usize,
    pub picard_tolerance: f64,
    pub picard_max_iterations: usize,
    pub picard_damping: f64,
    /// fluid backend: effective masses as multiples of the species mass
    pub electron_effective_mass: f64,
    pub ion_effective_mass: f64,
    /// angular model of electron elastic scattering
    pub electron_scattering: crate::plasma::ScatteringModel,
    /// eV, initial energy of secondary electrons leaving the cathode
    pub secondary_electron_energy: f64,
    pub cross_sections: CrossSectionFiles,
}

impl Default for PlasmaConfig {
    fn default() -> Self {
        PlasmaConfig {
            backend: PlasmaBackend::Kinetic,
            field_model: FieldModel::Sheath,
            dt: 2e-11,
            theta: 0.5,
            steps: 2000,
            ion_subcycle: 10,
            macro_particles: 10_000,
            max_macro_particles: 100_000,
            electron_density: 1e16,
            electron_temperature: 3.0,
            seed_region_height: 0.02,
            ions_magnetized: false,
            max_rotation_per_step: 0.3,
            max_collision_probability: 0.1,
            grid_nr: 33,
            grid_nz: 33,
            grid_stretch: 1.0,
            fine_zone: 0.04,
            poisson_tolerance: 1e-8,
            poisson_max_iterations: 100_000,
            picard_tolerance: 1e-6,
            picard_max_iterations: 200,
            picard_damping: 0.5,
            electron_effective_mass: 1.0,
            ion_effective_mass: 1.0,
            electron_scattering: crate::plasma::ScatteringModel::Isotropic,
            secondary_electron_energy: 2.0,
            cross_sections: CrossSectionFiles::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergySampler {
    /// closed-form inverse sampler with the κ·E_bom cutoff
    InverseCdf,
    /// numerical inverse of the C·E/(E+E_b)² distribution truncated at κ·E_bom
    Thompson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SputterConfig {
    pub target: ElementConfig,
    /// eV
    pub binding_energy: f64,
    /// CSV `ion_energy_eV,yield`
    pub yield_table: PathBuf,
    /// CSV `angle_deg,multiplier`
    pub angle_table: Option<PathBuf>,
    pub energy_sampler: EnergySampler,
    /// emission trials per recorded impact; each carries `weight / samples`
    pub samples_per_impact: usize,
}

impl Default for SputterConfig {
    fn default() -> Self {
        SputterConfig {
            target: ElementConfig { name: "Cu".into(), mass_amu: 63.546, atomic_number: 29 },
            binding_energy: 3.49,
            yield_table: "data/sputter/ar_cu_yield.csv".into(),
            angle_table: None,
            energy_sampler: EnergySampler::InverseCdf,
            samples_per_impact: 1,
        }
    }
}

/// Interatomic potential parameters. Energies in eV, lengths in m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialConfig {
    HardSphere { radius: f64, strength: f64 },
    BornMayer { a: f64, b: f64, r_inner: f64, r_outer: f64 },
    LennardJones { epsilon: f64, sigma: f64 },
    UniversalModified { epsilon: f64, sigma: f64, z1: u32, z2: u32 },
    /// `screen_table` is a CSV `x,psi`
    Firsov { z1: u32, z2: u32, screening_length: f64, screen_table: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThermalizedMode {
    /// keep following thermalized atoms collision by collision
    MonteCarlo,
    /// switch to a Gaussian random walk
    Diffusion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransportConfig {
    pub potential: PotentialConfig,
    /// σ_th, width of the thermalization window in units of k_B·T
    pub thermal_width: f64,
    pub thermalized: ThermalizedMode,
    /// gas atoms at rest instead of Maxwellian
    pub static_gas: bool,
    /// ignore the background gas: straight line-of-sight flights
    pub vacuum: bool,
    /// per-atom collision cap; atoms reaching it stay in flight
    pub max_collisions: usize,
    /// m²/s; derived from kinetic theory when absent
    pub diffusion_coefficient: Option<f64>,
    /// s
    pub diffusion_dt: f64,
    pub max_diffusion_steps: usize,
}

impl Default for TransportConfig {
    fn default() -> Self {
        TransportConfig {
            // Cu-Ar, illustrative
            potential: PotentialConfig::LennardJones { epsilon: 0.05, sigma: 2.9e-10 },
            thermal_width: 1.0,
            thermalized: ThermalizedMode::MonteCarlo,
            static_gas: false,
            vacuum: false,
            max_collisions: 5000,
            diffusion_coefficient: None,
            diffusion_dt: 2e-6,
            max_diffusion_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShieldConfig {
    pub name: String,
    pub z: f64,
    pub r_inner: f64,
    pub r_outer: f64,
}

/// Annular pump port on the chamber top; atoms reaching it escape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpConfig {
    pub r_inner: f64,
    pub r_outer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DepositionConfig {
    pub radial_cells: usize,
    pub azimuthal_cells: usize,
    pub wall_axial_cells: usize,
    pub angle_bins: usize,
    pub energy_bins: usize,
    /// eV; upper edge of the energy histograms, derived from the target when absent
    pub energy_max: Option<f64>,
    /// m³ per deposited atom
    pub atomic_volume: f64,
    /// fraction of arrivals that stick; only 1 is supported
    pub sticking: f64,
    pub shields: Vec<ShieldConfig>,
    pub pump: Option<PumpConfig>,
}

impl Default for DepositionConfig {
    fn default() -> Self {
        DepositionConfig {
            radial_cells: 20,
            azimuthal_cells: 16,
            wall_axial_cells: 20,
            angle_bins: 64,
            energy_bins: 64,
            energy_max: None,
            atomic_volume: 1.18e-29,
            sticking: 1.0,
            shields: Vec::new(),
            pump: None,
        }
    }
}

impl SimConfig {
    pub fn minimal() -> Self {
        SimConfig {
            schema_version: SCHEMA_VERSION,
            seed: default_seed(),
            chamber: Chamber::default(),
            gas: GasConfig::default(),
            discharge: DischargeConfig::default(),
            magnets: MagnetConfig::default(),
            plasma: PlasmaConfig::default(),
            sputter: SputterConfig::default(),
            transport: TransportConfig::default(),
            deposition: DepositionConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ModelError> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Background gas described by the `gas` and `chamber` sections.
    pub fn gas_state(&self) -> Result<super::GasState, ModelError> {
        super::GasState::new(self.gas.pressure, self.gas.temperature.clone(), self.gas.element.neutral(), self.chamber.clone())
    }

    pub fn to_toml_string(&self) -> Result<String, ModelError> {
        toml::to_string(self).map_err(|e| ModelError::Parse(e.to_string()))
    }

    /// Resolves relative file references against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let xs = &mut self.plasma.cross_sections;
        for p in [
            &mut xs.electron_elastic,
            &mut xs.electron_ionization,
            &mut xs.electron_excitation,
            &mut xs.ion_elastic,
            &mut xs.ion_charge_exchange,
            &mut self.magnets.field_map,
            &mut self.sputter.angle_table,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        fix(&mut self.sputter.yield_table);
        if let PotentialConfig::Firsov { screen_table, .. } = &mut self.transport.potential {
            fix(screen_table);
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let err = |f: &str, r: &str| Err(ModelError::invalid(f, r));
        if self.schema_version != SCHEMA_VERSION {
            return Err(ModelError::SchemaVersion { found: self.schema_version, expected: SCHEMA_VERSION });
        }
        self.chamber.validate()?;

        let g = &self.gas;
        if !(g.pressure > 0.0 && g.pressure.is_finite()) {
            return err("gas.pressure", "must be positive");
        }
        if !(g.temperature.min() > 0.0) {
            return err("gas.temperature", "must be positive");
        }
        if let TemperatureField::Map { nr, nz, values } = &g.temperature {
            if values.len() != nr * nz || *nr == 0 || *nz == 0 {
                return err("gas.temperature", "map needs nr*nz values");
            }
        }
        g.element.validate("gas.element")?;

        let d = &self.discharge;
        if !(d.applied_voltage >= 0.0 && d.applied_voltage.is_finite()) {
            return err("discharge.applied_voltage", "must be a non-negative magnitude");
        }
        let (lo, hi) = VOLTAGE_BAND_V;
        if d.applied_voltage < lo || d.applied_voltage > hi {
            log::warn!("applied voltage {} V outside the usual {lo}-{hi} V band", d.applied_voltage);
        }
        if let Some(ds) = d.sheath_thickness {
            if !(ds > 0.0 && ds < self.chamber.height) {
                return err("discharge.sheath_thickness", "must lie in (0, chamber height)");
            }
        }
        if d.presheath_drop != 0.0 && !(d.presheath_drop.abs() < 0.1 * d.applied_voltage) {
            return err("discharge.presheath_drop", "must be well below the applied voltage");
        }
        if let Some(gm) = d.secondary_yield {
            if !(gm >= 0.0 && gm.is_finite()) {
                return err("discharge.secondary_yield", "must be non-negative");
            }
        }
        if !(d.turbulent_field >= 0.0) {
            return err("discharge.turbulent_field", "must be non-negative");
        }

        for (i, l) in self.magnets.loops.iter().enumerate() {
            if !(l.radius > 0.0) {
                return err(&format!("magnets.loops[{i}].radius"), "must be positive");
            }
        }

        let p = &self.plasma;
        crate::fields::Theta::new(p.theta).map_err(|_| {
            ModelError::invalid("plasma.theta", format!("{} outside [1/2, 1]; the scheme is unstable below 1/2", p.theta))
        })?;
        if !(p.dt > 0.0) {
            return err("plasma.dt", "must be positive");
        }
        if p.ion_subcycle == 0 {
            return err("plasma.ion_subcycle", "must be at least 1");
        }
        if p.max_macro_particles < p.macro_particles {
            return err("plasma.max_macro_particles", "must be at least macro_particles");
        }
        if !(p.electron_density > 0.0) {
            return err("plasma.electron_density", "must be positive");
        }
        if !(p.electron_temperature >= 0.0) {
            return err("plasma.electron_temperature", "must be non-negative");
        }
        if !(p.seed_region_height > 0.0 && p.seed_region_height <= self.chamber.height) {
            return err("plasma.seed_region_height", "must lie in (0, chamber height]");
        }
        if !(p.max_rotation_per_step > 0.0) {
            return err("plasma.max_rotation_per_step", "must be positive");
        }
        if !(p.max_collision_probability > 0.0 && p.max_collision_probability < 1.0) {
            return err("plasma.max_collision_probability", "must lie in (0, 1)");
        }
        if p.grid_nr < 3 || p.grid_nz < 3 {
            return err("plasma.grid_nr", "grid needs at least 3x3 nodes");
        }
        if !(p.grid_stretch >= 1.0) {
            return err("plasma.grid_stretch", "must be >= 1");
        }
        if !(p.poisson_tolerance > 0.0) || p.poisson_max_iterations == 0 {
            return err("plasma.poisson_tolerance", "tolerance and iteration cap must be positive");
        }
        if !(p.picard_tolerance > 0.0) || p.picard_max_iterations == 0 {
            return err("plasma.picard_tolerance", "tolerance and iteration cap must be positive");
        }
        if !(p.picard_damping > 0.0 && p.picard_damping <= 1.0) {
            return err("plasma.picard_damping", "must lie in (0, 1]");
        }
        if !(p.electron_effective_mass > 0.0 && p.ion_effective_mass > 0.0) {
            return err("plasma.electron_effective_mass", "effective masses must be positive");
        }

        let s = &self.sputter;
        s.target.validate("sputter.target")?;
        if !(s.binding_energy > 0.0) {
            return err("sputter.binding_energy", "must be positive");
        }

        let t = &self.transport;
        crate::transport::PotentialModel::validate_config(&t.potential)?;
        if !(t.thermal_width >= 0.0) {
            return err("transport.thermal_width", "must be non-negative");
        }
        if t.max_collisions == 0 {
            return err("transport.max_collisions", "must be at least 1");
        }
        if let Some(dc) = t.diffusion_coefficient {
            if !(dc >= 0.0) {
                return err("transport.diffusion_coefficient", "must be non-negative");
            }
        }
        if !(t.diffusion_dt > 0.0) {
            return err("transport.diffusion_dt", "must be positive");
        }

        let dep = &self.deposition;
        if dep.radial_cells == 0 || dep.azimuthal_cells == 0 || dep.wall_axial_cells == 0 {
            return err("deposition.radial_cells", "cell counts must be positive");
        }
        if dep.angle_bins == 0 || dep.energy_bins == 0 {
            return err("deposition.angle_bins", "bin counts must be positive");
        }
        if !(dep.atomic_volume > 0.0) {
            return err("deposition.atomic_volume", "must be positive");
        }
        if dep.sticking != 1.0 {
            return err("deposition.sticking", "only unit sticking is supported");
        }
        for (i, sh) in dep.shields.iter().enumerate() {
            if !(sh.r_inner >= 0.0 && sh.r_outer > sh.r_inner && sh.r_outer <= self.chamber.radius) {
                return err(&format!("deposition.shields[{i}]"), "needs 0 <= r_inner < r_outer <= chamber radius");
            }
            if !(sh.z > self.chamber.target_z && sh.z < self.chamber.top_z()) {
                return err(&format!("deposition.shields[{i}].z"), "must lie strictly inside the chamber");
            }
        }
        if let Some(pump) = &dep.pump {
            if !(pump.r_inner >= 0.0 && pump.r_outer > pump.r_inner && pump.r_outer <= self.chamber.radius) {
                return err("deposition.pump", "needs 0 <= r_inner < r_outer <= chamber radius");
            }
        }
        Ok(())
    }
}

/// Reads, parses and validates a configuration file. Relative data paths
/// are resolved against the file's directory.
pub fn load_config(path: &Path) -> Result<SimConfig, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|e| ModelError::Io { path: path.to_path_buf(), source: e })?;
    let mut cfg = SimConfig::from_toml_str(&text)?;
    if let Some(dir) = path.parent() {
        cfg.resolve_paths(dir);
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = SimConfig::from_toml_str("schema_version = 1\n").unwrap();
        assert_eq!(cfg, SimConfig::minimal());
        assert_eq!(cfg.plasma.theta, 0.5);
        assert_eq!(cfg.gas.pressure, 1.0);
        assert!(cfg.discharge.sheath_thickness.is_none());
    }

    #[test]
    fn unstable_theta_is_rejected_by_name() {
        let e = SimConfig::from_toml_str("schema_version = 1\n[plasma]\ntheta = 0.3\n").unwrap_err();
        match e {
            ModelError::Invalid { field, .. } => assert_eq!(field, "plasma.theta"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_pressure_is_rejected() {
        let e = SimConfig::from_toml_str("schema_version = 1\n[gas]\npressure = -1.0\n").unwrap_err();
        assert!(matches!(e, ModelError::Invalid { ref field, .. } if field == "gas.pressure"));
    }

    #[test]
    fn malformed_and_unknown_fields() {
        assert!(matches!(SimConfig::from_toml_str("schema_version = [").unwrap_err(), ModelError::Parse(_)));
        assert!(matches!(SimConfig::from_toml_str("schema_version = 1\nbogus = 3\n").unwrap_err(), ModelError::Parse(_)));
        assert!(matches!(
            SimConfig::from_toml_str("schema_version = 7\n").unwrap_err(),
            ModelError::SchemaVersion { found: 7, .. }
        ));
    }

    #[test]
    fn potential_section_round_trips() {
        let text = r#"
schema_version = 1
[transport.potential]
kind = "universal-modified"
epsilon = 0.01
sigma = 5.29e-11
z1 = 29
z2 = 18
"#;
        let cfg = SimConfig::from_toml_str(text).unwrap();
        let back = SimConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(cfg, back);
    }
}
