//! Monte Carlo collisions of charged particles with the background gas.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::PlasmaError;
use crate::kinematics::{deflect, elastic_binary};
use crate::model::{CollisionProcess, CrossSectionTable, GasState, Particle, RngStream, Species, SpeciesId, SpeciesKind};
use crate::units::{ev_from_speed, speed_from_ev};

/// Hartree energy, eV; sets the anisotropy of the screened-Coulomb model.
const HARTREE_EV: f64 = 27.211_386;

/// Relative energy loss of a light projectile in an elastic collision
/// with a heavy target at rest, scattered by `alpha`.
pub fn elastic_loss_fraction(m: f64, big_m: f64, alpha: f64) -> f64 {
    debug_assert!(m <= big_m);
    let s = (0.5 * alpha).sin();
    4.0 * m / big_m * s * s
}

/// Current density of secondary electrons released by an ion current.
pub fn secondary_emission(j_i: f64, gamma: f64) -> f64 {
    debug_assert!(gamma >= 0.0);
    -gamma * j_i
}

/// Number of secondary electrons released by one absorbed ion: the integer
/// part of the yield plus one more with probability equal to its
/// fractional part.
pub fn secondaries_for_ion(gamma: f64, rng: &mut RngStream) -> u32 {
    let whole = gamma.floor();
    let extra = (rng.uniform() < gamma - whole) as u32;
    whole as u32 + extra
}

/// Angular distribution of electron elastic scattering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScatteringModel {
    #[default]
    Isotropic,
    /// Forward-peaked at high energy, isotropic as the energy goes to zero.
    ScreenedCoulomb,
}

impl ScatteringModel {
    pub fn sample_cos(self, energy_ev: f64, rng: &mut RngStream) -> f64 {
        let u = rng.uniform();
        match self {
            ScatteringModel::Isotropic => 1.0 - 2.0 * u,
            ScatteringModel::ScreenedCoulomb => {
                let eps = energy_ev / HARTREE_EV;
                let a = 4.0 * eps / (1.0 + 4.0 * eps);
                (1.0 - 2.0 * u * (1.0 - a) / (1.0 + a * (1.0 - 2.0 * u))).clamp(-1.0, 1.0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Elastic,
    Ionization,
    Excitation,
    ChargeExchange,
    Null,
}

impl From<CollisionProcess> for EventKind {
    fn from(p: CollisionProcess) -> Self {
        match p {
            CollisionProcess::Elastic => EventKind::Elastic,
            CollisionProcess::Ionization => EventKind::Ionization,
            CollisionProcess::Excitation => EventKind::Excitation,
            CollisionProcess::ChargeExchange => EventKind::ChargeExchange,
        }
    }
}

/// Outcome of one collision test. Energies are in eV and refer to the
/// projectile in the lab frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionEvent {
    pub kind: EventKind,
    pub energy_before: f64,
    pub energy_after: f64,
    /// Energy handed to the gas (elastic, charge exchange) or spent on the
    /// threshold (ionization, excitation).
    pub energy_transfer: f64,
    /// Kinetic energy of the spawned electron, ionization only.
    pub secondary_energy: f64,
    /// Deflection of the projectile, rad.
    pub angle: f64,
    pub spawned: Vec<Particle>,
}

impl CollisionEvent {
    fn null(energy: f64) -> Self {
        CollisionEvent {
            kind: EventKind::Null,
            energy_before: energy,
            energy_after: energy,
            energy_transfer: 0.0,
            secondary_energy: 0.0,
            angle: 0.0,
            spawned: Vec::new(),
        }
    }
}

/// Species created by ionization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IonizationProducts {
    pub electron: SpeciesId,
    pub electron_mass: f64,
    pub ion: SpeciesId,
    pub ion_mass: f64,
}

/// Cross sections of one projectile species on the background gas.
#[derive(Debug, Clone)]
pub struct CollisionSet {
    projectile: Species,
    target: Species,
    tables: Vec<CrossSectionTable>,
    scattering: ScatteringModel,
    products: Option<IonizationProducts>,
    max_probability: f64,
}

impl CollisionSet {
    pub fn new(projectile: Species, target: Species, tables: Vec<CrossSectionTable>) -> Result<Self, PlasmaError> {
        if target.is_charged() {
            return Err(PlasmaError::Collision(format!(
                "collisions between charged species ({} on {}) are neglected",
                projectile.name, target.name
            )));
        }
        if !projectile.is_charged() {
            return Err(PlasmaError::Collision(format!("{} is neutral; MCC handles charged projectiles", projectile.name)));
        }
        if tables.is_empty() {
            return Err(PlasmaError::MissingTable { projectile: projectile.name, target: target.name });
        }
        for (i, t) in tables.iter().enumerate() {
            if t.projectile != projectile.name || t.target != target.name {
                return Err(PlasmaError::Collision(format!(
                    "{} table is for {} on {}, expected {} on {}",
                    t.process, t.projectile, t.target, projectile.name, target.name
                )));
            }
            if tables[..i].iter().any(|o| o.process == t.process) {
                return Err(PlasmaError::Collision(format!("duplicate {} table", t.process)));
            }
            let electron = projectile.kind == SpeciesKind::Electron;
            let allowed = match t.process {
                CollisionProcess::Elastic => true,
                CollisionProcess::Ionization | CollisionProcess::Excitation => electron,
                CollisionProcess::ChargeExchange => !electron,
            };
            if !allowed {
                return Err(PlasmaError::Collision(format!("{} is not modeled for {}", t.process, projectile.name)));
            }
        }
        Ok(CollisionSet {
            projectile,
            target,
            tables,
            scattering: ScatteringModel::Isotropic,
            products: None,
            max_probability: 0.1,
        })
    }

    pub fn with_scattering(mut self, model: ScatteringModel) -> Self {
        self.scattering = model;
        self
    }

    pub fn with_products(mut self, products: IonizationProducts) -> Self {
        self.products = Some(products);
        self
    }

    pub fn with_max_probability(mut self, p: f64) -> Self {
        self.max_probability = p;
        self
    }

    pub fn projectile(&self) -> &Species {
        &self.projectile
    }

    pub fn tables(&self) -> &[CrossSectionTable] {
        &self.tables
    }

    pub fn has(&self, process: CollisionProcess) -> bool {
        self.tables.iter().any(|t| t.process == process)
    }

    pub fn total_sigma(&self, energy_ev: f64) -> f64 {
        self.tables.iter().map(|t| t.sigma(energy_ev)).sum()
    }

    /// Upper bound of `σ_tot(K) v(K)` for `K ≤ energy_cap` (eV).
    pub fn max_sigma_v(&self, energy_cap: f64) -> f64 {
        let mut knots: Vec<f64> = self.tables.iter().flat_map(|t| t.table().xs().iter().copied()).collect();
        knots.push(energy_cap);
        knots.retain(|&e| e > 0.0 && e <= energy_cap);
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let mut best = 0.0f64;
        let mut lo = 0.0;
        for &hi in &knots {
            // σv is not linear between knots; sample each segment
            for k in 1..=16 {
                let e = lo + (hi - lo) * k as f64 / 16.0;
                best = best.max(self.total_sigma(e) * speed_from_ev(e, self.projectile.mass));
            }
            lo = hi;
        }
        best
    }

    /// Checks `ν_max Δt` against the configured bound.
    pub fn check_step(&self, max_density: f64, energy_cap: f64, dt: f64) -> Result<f64, PlasmaError> {
        let nu_dt = max_density * self.max_sigma_v(energy_cap) * dt;
        if nu_dt > self.max_probability {
            return Err(PlasmaError::CollisionGuard { dt, nu_dt, limit: self.max_probability });
        }
        Ok(nu_dt)
    }
}

/// Tests particle `p` for a collision during `dt` and applies its
/// outcome. The collision probability is `1 - exp(-ν Δt)` with
/// `ν = n_gas σ_tot(K) g`; the process is then chosen in proportion to the
/// partial cross sections.
pub fn mcc_collide(
    p: &mut Particle,
    set: &CollisionSet,
    gas: &GasState,
    dt: f64,
    rng: &mut RngStream,
) -> Result<CollisionEvent, PlasmaError> {
    if !p.is_active() {
        return Err(PlasmaError::Collision("inactive particle passed to the collision operator".into()));
    }
    let m = set.projectile.mass;
    let big_m = set.target.mass;
    let electron = set.projectile.kind == SpeciesKind::Electron;
    let energy = ev_from_speed(p.velocity.norm(), m);
    let temperature = gas.temperature_at(&p.position);
    // electrons see the gas at rest; ions collide with a thermal partner
    let partner = if electron { crate::Vec3::zeros() } else { rng.maxwellian(big_m, temperature) };
    let g = (p.velocity - partner).norm();
    let rel_energy = ev_from_speed(g, m);
    // at most one table per process
    let mut sigmas = [0.0; 4];
    for (s, t) in sigmas.iter_mut().zip(&set.tables) {
        *s = t.sigma(rel_energy);
    }
    let sigmas = &sigmas[..set.tables.len()];
    let sigma_tot: f64 = sigmas.iter().sum();
    let nu_dt = gas.density_at(&p.position) * sigma_tot * g * dt;
    if nu_dt > set.max_probability {
        return Err(PlasmaError::CollisionGuard { dt, nu_dt, limit: set.max_probability });
    }
    let probability = -(-nu_dt).exp_m1();
    if nu_dt == 0.0 || rng.uniform() >= probability {
        return Ok(CollisionEvent::null(energy));
    }
    let pick = rng.uniform() * sigma_tot;
    let mut acc = 0.0;
    let mut chosen = set.tables.len() - 1;
    for (i, s) in sigmas.iter().enumerate() {
        acc += s;
        if pick < acc {
            chosen = i;
            break;
        }
    }
    let table = &set.tables[chosen];
    let mut event = CollisionEvent::null(energy);
    event.kind = table.process.into();
    let azimuth = TAU * rng.uniform();

    match table.process {
        CollisionProcess::Elastic if electron => {
            let cos = set.scattering.sample_cos(energy, rng);
            let alpha = cos.acos();
            let loss = elastic_loss_fraction(m, big_m, alpha);
            let after = energy * (1.0 - loss);
            p.velocity = deflect(&p.velocity, alpha, azimuth) * (1.0 - loss).sqrt();
            event.energy_after = after;
            event.energy_transfer = energy - after;
            event.angle = alpha;
        }
        CollisionProcess::Elastic => {
            let chi = (1.0 - 2.0 * rng.uniform()).acos();
            let before = p.velocity;
            let (v1, _) = elastic_binary(&p.velocity, m, &partner, big_m, chi, azimuth);
            p.velocity = v1;
            event.energy_after = ev_from_speed(v1.norm(), m);
            event.energy_transfer = energy - event.energy_after;
            event.angle = angle_between(&before, &v1);
        }
        CollisionProcess::ChargeExchange => {
            let before = p.velocity;
            p.velocity = partner;
            event.energy_after = ev_from_speed(partner.norm(), m);
            event.energy_transfer = energy - event.energy_after;
            event.angle = angle_between(&before, &partner);
        }
        CollisionProcess::Excitation => {
            let threshold = table.threshold_ev;
            if energy < threshold {
                return Ok(CollisionEvent::null(energy));
            }
            let after = energy - threshold;
            let alpha = set.scattering.sample_cos(energy, rng).acos();
            p.velocity = direction_or(&deflect(&p.velocity, alpha, azimuth)) * speed_from_ev(after, m);
            event.energy_after = after;
            event.energy_transfer = threshold;
            event.angle = alpha;
        }
        CollisionProcess::Ionization => {
            let threshold = table.threshold_ev;
            if energy < threshold {
                return Ok(CollisionEvent::null(energy));
            }
            let available = energy - threshold;
            let secondary = rng.uniform() * available;
            let after = available - secondary;
            let alpha = set.scattering.sample_cos(energy, rng).acos();
            p.velocity = direction_or(&deflect(&p.velocity, alpha, azimuth)) * speed_from_ev(after, m);
            event.energy_after = after;
            event.energy_transfer = threshold;
            event.secondary_energy = secondary;
            event.angle = alpha;
            let products = set.products.ok_or_else(|| {
                PlasmaError::Collision("ionization table given without product species".into())
            })?;
            let v_e = rng.unit_vector() * speed_from_ev(secondary, products.electron_mass);
            let v_i = rng.maxwellian(products.ion_mass, temperature);
            event.spawned.push(Particle::new(products.electron, p.position, v_e, p.weight)?);
            event.spawned.push(Particle::new(products.ion, p.position, v_i, p.weight)?);
        }
    }
    Ok(event)
}

fn direction_or(v: &crate::Vec3) -> crate::Vec3 {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        crate::Vec3::z()
    }
}

fn angle_between(a: &crate::Vec3, b: &crate::Vec3) -> f64 {
    let d = a.norm() * b.norm();
    if d == 0.0 {
        return 0.0;
    }
    (a.dot(b) / d).clamp(-1.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use crate::units::{AMU, ELECTRON_MASS};
    use crate::Vec3;

    fn table(process: CollisionProcess, projectile: &str, threshold: f64, pts: &[(f64, f64)]) -> CrossSectionTable {
        let threshold = process.is_inelastic().then_some(threshold);
        CrossSectionTable::new(process, projectile, "Ar", pts.to_vec(), threshold).unwrap()
    }

    fn electron_at(energy: f64) -> Particle {
        let v = speed_from_ev(energy, ELECTRON_MASS);
        Particle::new(SpeciesId(0), Vec3::new(0.0, 0.0, 0.05), Vec3::new(v, 0.0, 0.0), 1.0).unwrap()
    }

    #[test]
    fn loss_fraction_values() {
        assert_eq!(elastic_loss_fraction(1.0, 40.0, 0.0), 0.0);
        let back = elastic_loss_fraction(ELECTRON_MASS, 39.948 * AMU, PI);
        assert!((back - 5.49e-5).abs() < 0.01e-5);
        let side = elastic_loss_fraction(ELECTRON_MASS, 39.948 * AMU, PI / 2.0);
        assert!((side - back / 2.0).abs() < 1e-18);
    }

    #[test]
    fn emission_current() {
        assert_eq!(secondary_emission(1.0, 0.0), 0.0);
        assert!((secondary_emission(1.0, 0.1) + 0.1).abs() < 1e-15);
    }

    #[test]
    fn charged_targets_are_rejected() {
        let t = table(CollisionProcess::Elastic, "e", 0.0, &[(0.0, 1e-20), (100.0, 1e-20)]);
        let err = CollisionSet::new(Species::electron(), Species::argon_ion(), vec![t]);
        assert!(err.is_err());
        assert!(CollisionSet::new(Species::electron(), Species::argon(), vec![]).is_err());
    }

    #[test]
    fn zero_cross_section_is_always_null() {
        let t = table(CollisionProcess::Elastic, "e", 0.0, &[(0.0, 0.0), (100.0, 0.0)]);
        let set = CollisionSet::new(Species::electron(), Species::argon(), vec![t]).unwrap();
        let gas = GasState::uniform_argon(1.0, 300.0).unwrap();
        let mut rng = RngStream::new(3, 0);
        let mut p = electron_at(10.0);
        for _ in 0..1000 {
            assert_eq!(mcc_collide(&mut p, &set, &gas, 1e-9, &mut rng).unwrap().kind, EventKind::Null);
        }
    }

    #[test]
    fn below_threshold_ionization_never_happens() {
        let el = table(CollisionProcess::Elastic, "e", 0.0, &[(0.0, 1e-19), (100.0, 1e-19)]);
        let iz = table(CollisionProcess::Ionization, "e", 15.76, &[(0.0, 0.0), (15.76, 0.0), (100.0, 3e-20)]);
        let set = CollisionSet::new(Species::electron(), Species::argon(), vec![el, iz]).unwrap();
        let gas = GasState::uniform_argon(1.0, 300.0).unwrap();
        let mut rng = RngStream::new(5, 0);
        for _ in 0..20_000 {
            let mut p = electron_at(10.0);
            let ev = mcc_collide(&mut p, &set, &gas, 1e-9, &mut rng).unwrap();
            assert_ne!(ev.kind, EventKind::Ionization);
        }
    }

    #[test]
    fn ionization_bookkeeping_and_products() {
        let iz = table(CollisionProcess::Ionization, "e", 15.76, &[(0.0, 0.0), (15.76, 0.0), (200.0, 3e-18)]);
        let set = CollisionSet::new(Species::electron(), Species::argon(), vec![iz])
            .unwrap()
            .with_max_probability(1.0)
            .with_products(IonizationProducts {
                electron: SpeciesId(0),
                electron_mass: ELECTRON_MASS,
                ion: SpeciesId(1),
                ion_mass: 39.948 * AMU,
            });
        let gas = GasState::uniform_argon(10.0, 300.0).unwrap();
        let mut rng = RngStream::new(9, 0);
        let mut seen = 0;
        for _ in 0..5000 {
            let mut p = electron_at(80.0);
            let ev = mcc_collide(&mut p, &set, &gas, 2e-11, &mut rng).unwrap();
            if ev.kind == EventKind::Ionization {
                seen += 1;
                assert_eq!(ev.spawned.len(), 2);
                assert_eq!(ev.spawned[0].species, SpeciesId(0));
                assert_eq!(ev.spawned[1].species, SpeciesId(1));
                let residual = ev.energy_before - ev.energy_after - ev.secondary_energy - ev.energy_transfer;
                assert!(residual.abs() <= 4.0 * f64::EPSILON * ev.energy_before, "{residual}");
                assert!((ev.energy_transfer - 15.76).abs() < 1e-12);
            } else {
                assert!(ev.spawned.is_empty());
            }
        }
        assert!(seen > 100);
    }

    #[test]
    fn ions_exchange_charge_with_thermal_partners() {
        let cx = table(CollisionProcess::ChargeExchange, "Ar+", 0.0, &[(0.0, 5e-19), (1000.0, 5e-19)]);
        let set = CollisionSet::new(Species::argon_ion(), Species::argon(), vec![cx]).unwrap().with_max_probability(1.0);
        let gas = GasState::uniform_argon(10.0, 300.0).unwrap();
        let mut rng = RngStream::new(4, 0);
        let v = speed_from_ev(100.0, Species::argon_ion().mass);
        let mut hits = 0;
        for _ in 0..2000 {
            let mut p = Particle::new(SpeciesId(1), Vec3::new(0.0, 0.0, 0.05), Vec3::new(0.0, 0.0, -v), 1.0).unwrap();
            let ev = mcc_collide(&mut p, &set, &gas, 2e-8, &mut rng).unwrap();
            if ev.kind == EventKind::ChargeExchange {
                hits += 1;
                assert!(ev.energy_after < 1.0);
            }
        }
        assert!(hits > 50);
    }
}
