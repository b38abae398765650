//! Transport of sputtered neutrals through the background gas: pair
//! potentials, classical deflection, exponential free flights, the
//! thermalization test and the diffusive walk for thermalized atoms.
//!
//! Only elastic neutral-neutral scattering is generated here; collisions
//! with charged particles and inelastic channels are left out.

mod deflection;
mod flight;
mod potential;

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::deposition::{DepositionError, Hit, SurfaceMesh, SurfaceRole};
use crate::kinematics::elastic_binary;
use crate::model::{
    derive_seed, Arrival, EmittedAtom, GasState, ModelError, Particle, ParticleState, RngStream, SimConfig, Species,
    SpeciesId, ThermalizedMode, TransportConfig,
};
use crate::units::{joule_to_ev, BOLTZMANN};
use crate::Vec3;

pub use deflection::{deflection_with_error, rho_max, rmin_solve, scattering_angle, DeflectionTable};
pub use flight::{
    diffuse_walk, flight_length, free_flight_sample, kinetic_diffusion_coefficient, thermalization_check, WalkOutcome,
};
pub use potential::{universal_screening, PotentialModel, SCREEN_HEADER, UNIVERSAL_SCREENING};

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("potential: {0}")]
    Potential(String),
    #[error("deflection: {0}")]
    Deflection(String),
    #[error("flight: {0}")]
    Flight(String),
    #[error(
        "particle conservation violated after round {round}: emitted {emitted} != absorbed {absorbed} + in flight {in_flight} + escaped {escaped}"
    )]
    Conservation { round: usize, emitted: usize, absorbed: usize, in_flight: usize, escaped: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Deposition(#[from] DepositionError),
}

/// Energy range (eV) and node counts of the deflection lookup table.
pub const TABLE_ENERGY_RANGE: (f64, f64) = (1e-4, 1e4);
pub const TABLE_NODES: (usize, usize) = (129, 129);

/// Everything the transport kernel needs, resolved from the configuration.
#[derive(Debug, Clone)]
pub struct TransportModel {
    pub potential: PotentialModel,
    pub table: DeflectionTable,
    pub atom: Species,
    pub gas_mass: f64,
    /// `None` transports through vacuum
    pub gas: Option<GasState>,
    pub thermal_width: f64,
    pub mode: ThermalizedMode,
    pub static_gas: bool,
    pub max_collisions: usize,
    /// m²/s
    pub diffusion: f64,
    pub diffusion_dt: f64,
    pub max_diffusion_steps: usize,
}

impl TransportModel {
    pub fn new(
        potential: PotentialModel,
        atom: Species,
        gas: Option<GasState>,
        gas_species_mass: f64,
        cfg: &TransportConfig,
    ) -> Result<Self, TransportError> {
        if atom.is_charged() {
            return Err(TransportError::Flight(format!("transport handles neutrals only, `{}` is charged", atom.name)));
        }
        let (lo, hi) = TABLE_ENERGY_RANGE;
        let table = DeflectionTable::build(&potential, lo, hi, TABLE_NODES.0, TABLE_NODES.1)?;
        let diffusion = match (cfg.diffusion_coefficient, &gas) {
            (Some(d), _) => d,
            (None, Some(g)) => {
                let t = g.temperature.min();
                let mu = atom.mass * gas_species_mass / (atom.mass + gas_species_mass);
                let sigma = table.cross_section(joule_to_ev(1.5 * BOLTZMANN * t));
                if sigma > 0.0 {
                    kinetic_diffusion_coefficient(g.max_density(), sigma, t, mu)
                } else {
                    0.0
                }
            }
            (None, None) => 0.0,
        };
        Ok(TransportModel {
            potential,
            table,
            atom,
            gas_mass: gas_species_mass,
            gas,
            thermal_width: cfg.thermal_width,
            mode: cfg.thermalized,
            static_gas: cfg.static_gas,
            max_collisions: cfg.max_collisions,
            diffusion,
            diffusion_dt: cfg.diffusion_dt,
            max_diffusion_steps: cfg.max_diffusion_steps,
        })
    }

    pub fn from_config(cfg: &SimConfig) -> Result<Self, TransportError> {
        let gas = if cfg.transport.vacuum { None } else { Some(cfg.gas_state()?) };
        Self::new(
            PotentialModel::from_config(&cfg.transport.potential)?,
            cfg.sputter.target.sputtered(),
            gas,
            cfg.gas.element.mass(),
            &cfg.transport,
        )
    }

    fn reduced_mass(&self) -> f64 {
        self.atom.mass * self.gas_mass / (self.atom.mass + self.gas_mass)
    }
}

/// A transported atom between events.
#[derive(Debug, Clone, PartialEq)]
pub struct FlightState {
    pub particle: Particle,
    /// m, never decreases
    pub path_length: f64,
    pub collisions: u32,
    pub thermalized: bool,
}

impl FlightState {
    pub fn new(particle: Particle) -> Self {
        FlightState { particle, path_length: 0.0, collisions: 0, thermalized: false }
    }
}

/// Closure of one elastic collision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionRecord {
    /// eV
    pub e_cm: f64,
    pub rho: f64,
    pub chi: f64,
    /// `|Δp| / Σ|m v|` over the pair
    pub momentum_residual: f64,
    /// `|ΔK| / K` over the pair
    pub energy_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepEvent {
    Collision(CollisionRecord),
    /// rejected collision in a lower-density cell
    Null,
    /// reached a surface; the particle sits on the hit point
    Arrived(Hit),
    /// left the chamber without crossing a surface (rounding at edges)
    Lost,
}

/// Advances one atom to its next event: free flight, then either a surface
/// crossing or an elastic collision with a gas atom.
pub fn transport_step(
    state: &mut FlightState,
    model: &TransportModel,
    mesh: &SurfaceMesh,
    rng: &mut RngStream,
) -> Result<StepEvent, TransportError> {
    if state.particle.state().is_terminal() {
        return Err(TransportError::Flight("cannot move an absorbed or escaped atom".into()));
    }
    let m1 = model.atom.mass;
    let m2 = model.gas_mass;
    let v = state.particle.velocity;
    let speed = v.norm();
    let x = state.particle.position;
    let mu = model.reduced_mass();

    let flight = match &model.gas {
        None => f64::INFINITY,
        Some(g) => {
            let thermal = if model.static_gas { 0.0 } else { 3.0 * BOLTZMANN * g.temperature_at(&x) / m2 };
            let sigma = model.table.cross_section(joule_to_ev(0.5 * mu * (speed * speed + thermal)));
            if sigma > 0.0 {
                free_flight_sample(g, sigma, rng)?
            } else {
                f64::INFINITY
            }
        }
    };

    if speed > 0.0 {
        let dir = v / speed;
        if let Some(hit) = mesh.first_hit(&x, &dir, flight) {
            state.particle.position = hit.point;
            state.path_length += hit.distance;
            return Ok(StepEvent::Arrived(hit));
        }
        if !flight.is_finite() {
            return Ok(StepEvent::Lost);
        }
        state.particle.position = x + dir * flight;
        state.path_length += flight;
    }
    let gas = match &model.gas {
        Some(g) => g,
        None => return Ok(StepEvent::Lost),
    };
    let pos = state.particle.position;
    if !gas.chamber.contains(&pos) {
        return Ok(StepEvent::Lost);
    }
    if !gas.is_uniform() && rng.uniform() >= gas.density_at(&pos) / gas.max_density() {
        return Ok(StepEvent::Null);
    }

    let w = if model.static_gas { Vec3::zeros() } else { rng.maxwellian(m2, gas.temperature_at(&pos)) };
    let e_cm = joule_to_ev(0.5 * mu * (v - w).norm_squared());
    let rmax = model.table.rho_max(e_cm);
    let b = rng.uniform().sqrt();
    let chi = if rmax > 0.0 { model.table.chi(e_cm, b) } else { 0.0 };
    let azimuth = TAU * rng.uniform();
    let (v1, w1) = elastic_binary(&v, m1, &w, m2, chi, azimuth);

    let p0 = v * m1 + w * m2;
    let p1 = v1 * m1 + w1 * m2;
    let p_scale = m1 * v.norm() + m2 * w.norm();
    let k0 = m1 * v.norm_squared() + m2 * w.norm_squared();
    let k1 = m1 * v1.norm_squared() + m2 * w1.norm_squared();
    let record = CollisionRecord {
        e_cm,
        rho: b * rmax,
        chi,
        momentum_residual: if p_scale > 0.0 { (p1 - p0).norm() / p_scale } else { 0.0 },
        energy_residual: if k0 > 0.0 { (k1 - k0).abs() / k0 } else { 0.0 },
    };

    state.particle.velocity = v1;
    state.collisions += 1;
    if !state.thermalized && thermalization_check(&state.particle, m1, gas, model.thermal_width) {
        state.thermalized = true;
        state.particle.transition(ParticleState::Thermalized)?;
    }
    Ok(StepEvent::Collision(record))
}

/// Totals over a transport run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TransportStats {
    pub emitted: usize,
    pub absorbed: usize,
    pub escaped: usize,
    pub in_flight: usize,
    pub collisions: u64,
    pub null_events: u64,
    pub thermalized: usize,
    pub diffusion_steps: u64,
    /// atoms stopped by the collision cap or the diffusion step budget
    pub capped: usize,
    /// atoms that left the chamber between surfaces
    pub lost: usize,
    pub max_momentum_residual: f64,
    pub max_energy_residual: f64,
    pub rounds: usize,
    /// the conservation identity was checked after every round
    pub conservation_checks: usize,
}

#[derive(Debug, Clone)]
pub struct TransportOutput {
    /// sorted by atom index
    pub arrivals: Vec<Arrival>,
    pub stats: TransportStats,
}

/// Events each atom may process before the population is re-counted.
const EVENTS_PER_ROUND: usize = 256;
const DIFFUSION_STEPS_PER_EVENT: usize = 64;

#[derive(Debug)]
enum Fate {
    Flying,
    Absorbed,
    Escaped,
    /// stopped by a budget, left in flight
    Parked,
}

struct Slot {
    atom: usize,
    state: FlightState,
    rng: RngStream,
    diffusion_steps: usize,
    fate: Fate,
    arrival: Option<Arrival>,
    collisions: u64,
    nulls: u64,
    diff_steps: u64,
    lost: bool,
    max_p: f64,
    max_e: f64,
}

impl Slot {
    fn arrive(&mut self, hit: &Hit, mesh: &SurfaceMesh) -> Result<(), TransportError> {
        let surf = &mesh.surfaces[hit.surface];
        let p = &mut self.state.particle;
        match surf.role {
            SurfaceRole::Pump => {
                p.transition(ParticleState::Escaped)?;
                self.fate = Fate::Escaped;
            }
            SurfaceRole::Deposit => {
                p.transition(ParticleState::Absorbed)?;
                self.fate = Fate::Absorbed;
                self.arrival = Some(Arrival {
                    atom: self.atom as u64,
                    surface: surf.name.clone(),
                    cell: hit.cell,
                    x: p.position.x,
                    y: p.position.y,
                    z: p.position.z,
                    vx: p.velocity.x,
                    vy: p.velocity.y,
                    vz: p.velocity.z,
                    weight: p.weight,
                    collisions: self.state.collisions,
                    thermalized: self.state.thermalized,
                });
            }
        }
        Ok(())
    }

    fn run(&mut self, model: &TransportModel, mesh: &SurfaceMesh) -> Result<(), TransportError> {
        for _ in 0..EVENTS_PER_ROUND {
            if self.state.thermalized && model.mode == ThermalizedMode::Diffusion {
                let gas = model.gas.as_ref().expect("thermalized atoms imply a gas");
                let budget = DIFFUSION_STEPS_PER_EVENT.min(model.max_diffusion_steps - self.diffusion_steps);
                let (outcome, steps) = diffuse_walk(
                    &mut self.state.particle,
                    mesh,
                    gas,
                    model.atom.mass,
                    model.diffusion,
                    model.diffusion_dt,
                    budget,
                    &mut self.rng,
                )?;
                self.diffusion_steps += steps;
                self.diff_steps += steps as u64;
                match outcome {
                    WalkOutcome::Arrived(hit) => return self.arrive(&hit, mesh),
                    WalkOutcome::Stalled => {
                        if self.diffusion_steps >= model.max_diffusion_steps || model.diffusion == 0.0 {
                            self.fate = Fate::Parked;
                            return Ok(());
                        }
                    }
                }
                continue;
            }
            if self.state.collisions as usize >= model.max_collisions {
                self.fate = Fate::Parked;
                return Ok(());
            }
            match transport_step(&mut self.state, model, mesh, &mut self.rng)? {
                StepEvent::Arrived(hit) => return self.arrive(&hit, mesh),
                StepEvent::Lost => {
                    self.state.particle.transition(ParticleState::Escaped)?;
                    self.fate = Fate::Escaped;
                    self.lost = true;
                    return Ok(());
                }
                StepEvent::Null => self.nulls += 1,
                StepEvent::Collision(rec) => {
                    self.collisions += 1;
                    self.max_p = self.max_p.max(rec.momentum_residual);
                    self.max_e = self.max_e.max(rec.energy_residual);
                }
            }
        }
        Ok(())
    }
}

/// Transports every emitted atom until it is absorbed, escapes through a
/// pump, or exhausts its budget. Atom `i` draws from stream `i` of the
/// transport seed, so results do not depend on the number of workers.
pub fn run_transport(
    model: &TransportModel,
    mesh: &SurfaceMesh,
    atoms: &[EmittedAtom],
    seed: u64,
) -> Result<TransportOutput, TransportError> {
    let stream_seed = derive_seed(seed, "transport");
    let mut active: Vec<Slot> = atoms
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let p = Particle::new(SpeciesId(0), a.position(), a.velocity(), a.weight)?;
            Ok(Slot {
                atom: i,
                state: FlightState::new(p),
                rng: RngStream::new(stream_seed, i as u64),
                diffusion_steps: 0,
                fate: Fate::Flying,
                arrival: None,
                collisions: 0,
                nulls: 0,
                diff_steps: 0,
                lost: false,
                max_p: 0.0,
                max_e: 0.0,
            })
        })
        .collect::<Result<_, ModelError>>()?;

    let mut stats = TransportStats { emitted: atoms.len(), ..Default::default() };
    let mut arrivals = Vec::new();
    while !active.is_empty() {
        active.par_iter_mut().try_for_each(|s| s.run(model, mesh))?;
        stats.rounds += 1;
        let mut still = Vec::with_capacity(active.len());
        for s in active {
            stats.collisions += s.collisions;
            stats.null_events += s.nulls;
            stats.diffusion_steps += s.diff_steps;
            stats.max_momentum_residual = stats.max_momentum_residual.max(s.max_p);
            stats.max_energy_residual = stats.max_energy_residual.max(s.max_e);
            let s = Slot { collisions: 0, nulls: 0, diff_steps: 0, ..s };
            match s.fate {
                Fate::Flying => still.push(s),
                Fate::Absorbed => {
                    stats.absorbed += 1;
                    stats.thermalized += s.state.thermalized as usize;
                    arrivals.push(s.arrival.expect("absorbed atoms carry an arrival"));
                }
                Fate::Escaped => {
                    stats.escaped += 1;
                    stats.thermalized += s.state.thermalized as usize;
                    stats.lost += s.lost as usize;
                }
                Fate::Parked => {
                    stats.in_flight += 1;
                    stats.capped += 1;
                    stats.thermalized += s.state.thermalized as usize;
                }
            }
        }
        active = still;
        let in_flight = stats.in_flight + active.len();
        if stats.absorbed + stats.escaped + in_flight != stats.emitted || arrivals.len() != stats.absorbed {
            return Err(TransportError::Conservation {
                round: stats.rounds,
                emitted: stats.emitted,
                absorbed: stats.absorbed,
                in_flight,
                escaped: stats.escaped,
            });
        }
        stats.conservation_checks += 1;
    }
    if stats.lost > 0 {
        log::warn!("{} atoms left the chamber between surfaces and were counted as escaped", stats.lost);
    }
    arrivals.sort_by_key(|a| a.atom);
    Ok(TransportOutput { arrivals, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Chamber, DepositionConfig, PotentialConfig};
    use crate::units::AMU;

    fn model(gas: Option<GasState>) -> TransportModel {
        let cfg = TransportConfig::default();
        let pot = PotentialModel::from_config(&cfg.potential).unwrap();
        TransportModel::new(pot, Species::copper(), gas, 39.948 * AMU, &cfg).unwrap()
    }

    #[test]
    fn vacuum_flight_is_straight() {
        let m = model(None);
        let mesh = SurfaceMesh::chamber(&Chamber::default(), &DepositionConfig::default()).unwrap();
        let atoms = vec![EmittedAtom::new(Vec3::new(0.01, 0.0, 0.0), Vec3::new(0.0, 0.0, 3000.0), 1.0)];
        let out = run_transport(&m, &mesh, &atoms, 5).unwrap();
        assert_eq!(out.arrivals.len(), 1);
        let a = &out.arrivals[0];
        assert_eq!(a.surface, "substrate");
        assert_eq!((a.x, a.y, a.collisions), (0.01, 0.0, 0));
        assert!((a.z - 0.08).abs() < 1e-15);
    }

    #[test]
    fn charged_projectiles_are_refused() {
        let cfg = TransportConfig::default();
        let pot = PotentialModel::from_config(&PotentialConfig::LennardJones { epsilon: 0.05, sigma: 2.9e-10 }).unwrap();
        assert!(TransportModel::new(pot, Species::argon_ion(), None, 39.948 * AMU, &cfg).is_err());
    }

    #[test]
    fn gas_collisions_conserve_and_close_the_books() {
        let g = GasState::uniform_argon(1.0, 300.0).unwrap();
        let m = model(Some(g));
        let mesh = SurfaceMesh::chamber(&Chamber::default(), &DepositionConfig::default()).unwrap();
        let atoms: Vec<_> = (0..200)
            .map(|i| EmittedAtom::new(Vec3::new(0.0, 0.001 * i as f64 / 200.0, 0.0), Vec3::new(1500.0, 0.0, 4000.0), 1.0))
            .collect();
        let out = run_transport(&m, &mesh, &atoms, 11).unwrap();
        let s = &out.stats;
        assert!(s.collisions > 1000);
        assert_eq!(s.absorbed + s.escaped + s.in_flight, 200);
        assert!(s.max_momentum_residual < 1e-12 && s.max_energy_residual < 1e-12);
        assert!(out.arrivals.windows(2).all(|w| w[0].atom < w[1].atom));
    }
}
