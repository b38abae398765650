//! Kinetic plasma backend: electrons and ions as macro-particles pushed
//! through the sheath (or self-consistent) field and the magnet field, with
//! Monte Carlo collisions against the gas and secondary emission at the
//! cathode. Produces the list of ion impacts on the target.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use super::collisions::{mcc_collide, secondaries_for_ion, CollisionSet, EventKind, IonizationProducts};
use super::pic::{implicit_pic_cycle, sample_fields, ChargedSpecies, PicSettings};
use super::push::{push_in_place, PushFields, PushSettings};
use super::PlasmaError;
use crate::fields::{CathodeBoundary, FieldMap, Grid, MagnetSpec, PoissonSettings, SheathModel, Theta};
use crate::model::{
    derive_seed, load_cross_sections, Chamber, CollisionProcess, FieldModel, GasState, IonImpact, Particle,
    ParticleState, RngStream, SimConfig, Species, SpeciesId,
};
use crate::units::{ev_from_speed, speed_from_ev, BOLTZMANN, ELEMENTARY_CHARGE, ELECTRON_MASS};
use crate::Vec3;

pub const ELECTRON: SpeciesId = SpeciesId(0);
pub const ION: SpeciesId = SpeciesId(1);

/// One row of the per-step diagnostics stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticRow {
    pub step: usize,
    pub time: f64,
    pub electrons: usize,
    pub ions: usize,
    /// eV
    pub mean_electron_energy: f64,
    /// eV
    pub mean_ion_energy: f64,
    pub max_abs_phi: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Default)]
pub struct PlasmaOutput {
    pub impacts: Vec<IonImpact>,
    pub diagnostics: Vec<DiagnosticRow>,
    pub ionizations: u64,
    pub secondaries: u64,
    /// population reductions applied
    pub reductions: usize,
}

/// The r–z mesh used for the magnet field map and the field solve.
pub fn plasma_grid(cfg: &SimConfig) -> Result<Grid, PlasmaError> {
    let p = &cfg.plasma;
    let c = &cfg.chamber;
    Ok(Grid::stretched(p.grid_nr, p.grid_nz, c.radius, c.target_z, c.height, p.grid_stretch, p.fine_zone)?)
}

/// Everything the plasma backends need, built once from the configuration.
#[derive(Debug, Clone)]
pub struct PlasmaSetup {
    pub gas: GasState,
    pub field: FieldMap,
    pub sheath: Option<SheathModel>,
    pub electron: Species,
    pub ion: Species,
    pub electron_set: Option<CollisionSet>,
    pub ion_set: Option<CollisionSet>,
}

fn load_set(
    projectile: &Species,
    target: &Species,
    files: &[(Option<&std::path::PathBuf>, CollisionProcess)],
) -> Result<Option<CollisionSet>, PlasmaError> {
    let mut tables = Vec::new();
    for (path, process) in files {
        if let Some(path) = path {
            tables.push(load_cross_sections(path, *process)?);
        }
    }
    if tables.is_empty() {
        return Ok(None);
    }
    Ok(Some(CollisionSet::new(projectile.clone(), target.clone(), tables)?))
}

impl PlasmaSetup {
    pub fn from_config(cfg: &SimConfig) -> Result<Self, PlasmaError> {
        let gas = cfg.gas_state()?;
        let magnets = MagnetSpec::from_config(&cfg.magnets)?;
        magnets.check_target_field(&cfg.chamber)?;
        let field = FieldMap::with_magnets(plasma_grid(cfg)?, &magnets)?;
        let d = &cfg.discharge;
        let sheath = match (cfg.plasma.field_model, d.sheath_thickness) {
            (_, Some(ds)) => Some(SheathModel::new(ds, d.applied_voltage, d.presheath_drop)?),
            (FieldModel::Sheath, None) => {
                return Err(PlasmaError::Stage(
                    "discharge.sheath_thickness is required with the sheath field model".into(),
                ))
            }
            (FieldModel::Pic, None) => None,
        };
        let electron = Species::electron();
        let ion = cfg.gas.element.ion();
        let xs = &cfg.plasma.cross_sections;
        let products = IonizationProducts {
            electron: ELECTRON,
            electron_mass: electron.mass,
            ion: ION,
            ion_mass: ion.mass,
        };
        let limit = cfg.plasma.max_collision_probability;
        let electron_set = load_set(
            &electron,
            &gas.species,
            &[
                (xs.electron_elastic.as_ref(), CollisionProcess::Elastic),
                (xs.electron_ionization.as_ref(), CollisionProcess::Ionization),
                (xs.electron_excitation.as_ref(), CollisionProcess::Excitation),
            ],
        )?
        .map(|s| s.with_products(products).with_scattering(cfg.plasma.electron_scattering).with_max_probability(limit));
        let ion_set = load_set(
            &ion,
            &gas.species,
            &[
                (xs.ion_elastic.as_ref(), CollisionProcess::Elastic),
                (xs.ion_charge_exchange.as_ref(), CollisionProcess::ChargeExchange),
            ],
        )?
        .map(|s| s.with_max_probability(limit));
        Ok(PlasmaSetup { gas, field, sheath, electron, ion, electron_set, ion_set })
    }

    fn charged(&self, cfg: &SimConfig) -> [ChargedSpecies; 2] {
        [
            ChargedSpecies { charge: self.electron.charge, mass: self.electron.mass, magnetized: true },
            ChargedSpecies { charge: self.ion.charge, mass: self.ion.mass, magnetized: cfg.plasma.ions_magnetized },
        ]
    }
}

#[derive(Debug, Clone)]
struct Tracked {
    p: Particle,
    rng: RngStream,
}

#[derive(Debug, Default)]
struct Outcome {
    spawned: Vec<Particle>,
    impact: Option<IonImpact>,
    ionized: bool,
    secondaries: u32,
}

/// Read-only state shared by all workers during one step.
struct Ctx<'a> {
    cfg: &'a SimConfig,
    setup: &'a PlasmaSetup,
    chamber: &'a Chamber,
    species: [ChargedSpecies; 2],
    gamma: f64,
}

impl Ctx<'_> {
    fn sheath_fields(&self, t: &mut Tracked) -> (Vec3, Vec3) {
        let pos = t.p.position;
        let sheath = self.setup.sheath.as_ref().expect("sheath model present");
        let mut e = Vec3::new(0.0, 0.0, sheath.field_z(pos.z - self.chamber.target_z));
        let turb = self.cfg.discharge.turbulent_field;
        let r = pos.x.hypot(pos.y);
        if turb > 0.0 && r > 0.0 {
            let sign = if t.rng.uniform() < 0.5 { -1.0 } else { 1.0 };
            e += Vec3::new(-pos.y / r, pos.x / r, 0.0) * (sign * turb);
        }
        let b = sample_fields(&self.setup.field, &pos).map(|f| f.1).unwrap_or_else(Vec3::zeros);
        (e, b)
    }

    /// Boundary test after a move from `prev`, then the collision test.
    fn settle(&self, t: &mut Tracked, prev: Vec3, dt: f64) -> Result<Outcome, PlasmaError> {
        let mut out = Outcome::default();
        let c = self.chamber;
        let pos = t.p.position;
        let is_ion = t.p.species == ION;
        if pos.z <= c.target_z {
            let f = if prev.z > pos.z { (prev.z - c.target_z) / (prev.z - pos.z) } else { 0.0 };
            let mut hit = prev + (pos - prev) * f.clamp(0.0, 1.0);
            hit.z = c.target_z;
            t.p.position = hit;
            if is_ion && hit.x.hypot(hit.y) <= c.target_radius {
                let v = t.p.velocity;
                let angle = if v.norm() > 0.0 { (-v.z / v.norm()).clamp(-1.0, 1.0).acos() } else { 0.0 };
                out.impact = Some(IonImpact {
                    x: hit.x,
                    y: hit.y,
                    z: hit.z,
                    energy: ev_from_speed(v.norm(), self.species[1].mass),
                    angle,
                    weight: t.p.weight,
                });
                let n = secondaries_for_ion(self.gamma, &mut t.rng);
                let speed = speed_from_ev(self.cfg.plasma.secondary_electron_energy, ELECTRON_MASS);
                for _ in 0..n {
                    // Lambertian emission into the chamber
                    let sin_t = t.rng.uniform().sqrt();
                    let cos_t = (1.0 - sin_t * sin_t).sqrt();
                    let phi = TAU * t.rng.uniform();
                    let dir = Vec3::new(sin_t * phi.cos(), sin_t * phi.sin(), cos_t);
                    let start = Vec3::new(hit.x, hit.y, c.target_z + 1e-9);
                    out.spawned.push(Particle::new(ELECTRON, start, dir * speed, t.p.weight)?);
                }
                out.secondaries = n;
            }
            t.p.transition(ParticleState::Absorbed)?;
            return Ok(out);
        }
        if pos.x.hypot(pos.y) >= c.radius || pos.z >= c.top_z() {
            t.p.transition(ParticleState::Absorbed)?;
            return Ok(out);
        }
        let set = if is_ion { self.setup.ion_set.as_ref() } else { self.setup.electron_set.as_ref() };
        if let Some(set) = set {
            let ev = mcc_collide(&mut t.p, set, &self.setup.gas, dt, &mut t.rng)?;
            out.ionized = ev.kind == EventKind::Ionization;
            out.spawned = ev.spawned;
        }
        Ok(out)
    }

    fn advance(&self, t: &mut Tracked, dt: f64) -> Result<Outcome, PlasmaError> {
        let prev = t.p.position;
        let sp = self.species[t.p.species.0 as usize];
        let (e, b) = self.sheath_fields(t);
        let b = if sp.magnetized { b } else { Vec3::zeros() };
        let settings = PushSettings {
            dt,
            theta: Theta::new(self.cfg.plasma.theta)?,
            max_rotation: self.cfg.plasma.max_rotation_per_step,
        };
        push_in_place(&mut t.p, sp.q_over_m(), &PushFields::steady(e, b), &settings)?;
        self.settle(t, prev, dt)
    }
}

fn mean_energy_ev(v: &[Tracked], mass: f64) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().map(|t| ev_from_speed(t.p.velocity.norm(), mass)).sum::<f64>() / v.len() as f64
}

/// Thins a population above `cap` down to three quarters of it, keeping
/// the total weight exactly.
fn reduce(v: &mut Vec<Tracked>, cap: usize, seed: u64, stream: u64) -> bool {
    if v.len() <= cap {
        return false;
    }
    let keep = (cap * 3 / 4).max(1) as f64 / v.len() as f64;
    let total: f64 = v.iter().map(|t| t.p.weight).sum();
    let mut rng = RngStream::new(seed, stream);
    v.retain(|_| rng.uniform() < keep);
    let kept: f64 = v.iter().map(|t| t.p.weight).sum();
    if kept > 0.0 {
        let scale = total / kept;
        for t in v.iter_mut() {
            t.p.weight *= scale;
        }
    }
    true
}

fn seed_population(cfg: &SimConfig, setup: &PlasmaSetup, seed: u64) -> Result<(Vec<Tracked>, Vec<Tracked>), PlasmaError> {
    let p = &cfg.plasma;
    let c = &cfg.chamber;
    let n = p.macro_particles;
    let volume = std::f64::consts::PI * c.target_radius.powi(2) * p.seed_region_height;
    let weight = (p.electron_density * volume / n.max(1) as f64).max(f64::MIN_POSITIVE);
    let te_k = p.electron_temperature * ELEMENTARY_CHARGE / BOLTZMANN;
    let mut electrons = Vec::with_capacity(n);
    let mut ions = Vec::with_capacity(n);
    for i in 0..n as u64 {
        let mut place = RngStream::new(derive_seed(seed, "plasma-seed"), i);
        let r = c.target_radius * place.uniform().sqrt();
        let phi = TAU * place.uniform();
        let z = c.target_z + p.seed_region_height * place.uniform_open();
        let pos = Vec3::new(r * phi.cos(), r * phi.sin(), z.min(c.top_z() * (1.0 - 1e-12)));
        let ve = if te_k > 0.0 { place.maxwellian(ELECTRON_MASS, te_k) } else { Vec3::zeros() };
        let t_gas = setup.gas.temperature_at(&pos);
        let vi = place.maxwellian(setup.ion.mass, t_gas);
        electrons.push(Tracked { p: Particle::new(ELECTRON, pos, ve, weight)?, rng: RngStream::new(seed, 2 * i) });
        ions.push(Tracked { p: Particle::new(ION, pos, vi, weight)?, rng: RngStream::new(seed, 2 * i + 1) });
    }
    Ok((electrons, ions))
}

fn check_guards(cfg: &SimConfig, setup: &PlasmaSetup, ion_dt: f64) -> Result<(), PlasmaError> {
    let p = &cfg.plasma;
    let bmax = setup.field.br.iter().zip(&setup.field.bz).fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)));
    let omega_dt = ELEMENTARY_CHARGE / ELECTRON_MASS * bmax * p.dt;
    if omega_dt >= p.max_rotation_per_step {
        return Err(PlasmaError::Resolution { dt: p.dt, omega_dt, limit: p.max_rotation_per_step });
    }
    let cap = cfg.discharge.applied_voltage + cfg.discharge.presheath_drop.abs() + 10.0 * p.electron_temperature;
    let n_max = setup.gas.max_density();
    if let Some(s) = &setup.electron_set {
        s.check_step(n_max, cap, p.dt)?;
    }
    if let Some(s) = &setup.ion_set {
        s.check_step(n_max, cap, ion_dt)?;
    }
    Ok(())
}

/// Runs the kinetic backend for `cfg.plasma.steps` electron steps.
pub fn run_kinetic(cfg: &SimConfig, setup: &PlasmaSetup, seed: u64) -> Result<PlasmaOutput, PlasmaError> {
    let p = &cfg.plasma;
    let pic = p.field_model == FieldModel::Pic;
    let sub = if pic { 1 } else { p.ion_subcycle };
    let ion_dt = p.dt * sub as f64;
    check_guards(cfg, setup, ion_dt)?;
    let seed = derive_seed(seed, "plasma");
    let ctx = Ctx {
        cfg,
        setup,
        chamber: &cfg.chamber,
        species: setup.charged(cfg),
        gamma: cfg.discharge.secondary_yield.unwrap_or_else(|| {
            log::warn!("discharge.secondary_yield not set; no secondary electrons are emitted");
            0.0
        }),
    };
    let (mut electrons, mut ions) = seed_population(cfg, setup, seed)?;
    let mut next_stream = 2 * p.macro_particles as u64;
    let mut out = PlasmaOutput::default();
    let mut mesh = setup.field.clone();
    let pic_settings = PicSettings {
        tolerance: p.picard_tolerance,
        max_iterations: p.picard_max_iterations,
        damping: p.picard_damping,
        max_rotation: p.max_rotation_per_step,
        poisson: PoissonSettings { tolerance: p.poisson_tolerance, max_iterations: p.poisson_max_iterations, omega: None },
        ..PicSettings::new(
            p.dt,
            Theta::new(p.theta)?,
            cfg.discharge.applied_voltage,
            CathodeBoundary { radius: cfg.chamber.target_radius },
        )
    };
    if pic {
        let all: Vec<Particle> = electrons.iter().chain(&ions).map(|t| t.p.clone()).collect();
        let rho = super::pic::deposit_charge(&mesh.grid, &all, &ctx.species);
        let phi = super::pic::solve_potential(&mesh.grid, &rho, &pic_settings, None)?;
        mesh.set_potential(phi);
    }

    for step in 1..=p.steps {
        let mut iterations = 0;
        let mut outcomes: Vec<Outcome>;
        if pic {
            let before: Vec<Vec3> = electrons.iter().chain(&ions).map(|t| t.p.position).collect();
            let all: Vec<Particle> = electrons.iter().chain(&ions).map(|t| t.p.clone()).collect();
            let res = implicit_pic_cycle(&all, &ctx.species, &mesh, &pic_settings)?;
            iterations = res.iterations;
            mesh = res.field_map;
            for (t, q) in electrons.iter_mut().chain(ions.iter_mut()).zip(res.particles) {
                t.p = q;
            }
            outcomes = electrons
                .par_iter_mut()
                .chain(ions.par_iter_mut())
                .zip(before.par_iter())
                .map(|(t, prev)| ctx.settle(t, *prev, p.dt))
                .collect::<Result<_, _>>()?;
        } else {
            outcomes = electrons.par_iter_mut().map(|t| ctx.advance(t, p.dt)).collect::<Result<_, _>>()?;
            if step % sub == 0 {
                let ion_out: Vec<Outcome> =
                    ions.par_iter_mut().map(|t| ctx.advance(t, ion_dt)).collect::<Result<_, _>>()?;
                outcomes.extend(ion_out);
            }
        }
        for o in outcomes {
            out.ionizations += o.ionized as u64;
            out.secondaries += o.secondaries as u64;
            if let Some(imp) = o.impact {
                out.impacts.push(imp);
            }
            for s in o.spawned {
                let rng = RngStream::new(seed, next_stream);
                next_stream += 1;
                let t = Tracked { p: s, rng };
                if t.p.species == ELECTRON {
                    electrons.push(t);
                } else {
                    ions.push(t);
                }
            }
        }
        electrons.retain(|t| t.p.is_active());
        ions.retain(|t| t.p.is_active());
        let reduce_seed = derive_seed(seed, "reduce");
        out.reductions += reduce(&mut electrons, p.max_macro_particles, reduce_seed, 2 * step as u64) as usize;
        out.reductions += reduce(&mut ions, p.max_macro_particles, reduce_seed, 2 * step as u64 + 1) as usize;

        let max_abs_phi = if pic {
            mesh.max_abs_phi()
        } else {
            cfg.discharge.applied_voltage.max(cfg.discharge.presheath_drop.abs())
        };
        out.diagnostics.push(DiagnosticRow {
            step,
            time: step as f64 * p.dt,
            electrons: electrons.len(),
            ions: ions.len(),
            mean_electron_energy: mean_energy_ev(&electrons, setup.electron.mass),
            mean_ion_energy: mean_energy_ev(&ions, setup.ion.mass),
            max_abs_phi,
            iterations,
        });
        if electrons.is_empty() && ions.is_empty() {
            break;
        }
    }
    Ok(out)
}
