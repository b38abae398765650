//! Electrostatic implicit particle-in-cell cycle: charge deposition, field
//! solve and θ-scheme push coupled by damped Picard iteration.

use rayon::prelude::*;

use super::push::{push_in_place, PushFields, PushSettings};
use super::PlasmaError;
use crate::fields::{solve_axisymmetric, CathodeBoundary, FieldMap, Grid, PoissonSettings, Theta};
use crate::model::Particle;
use crate::units::EPSILON_0;
use crate::Vec3;

/// Fixed chunk size of the deposition tallies; partial sums are merged in
/// chunk order so the result does not depend on the worker count.
const DEPOSIT_CHUNK: usize = 2048;

/// Charge, mass and field coupling of one species, indexed by `SpeciesId`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargedSpecies {
    pub charge: f64,
    pub mass: f64,
    /// feels the magnetic force
    pub magnetized: bool,
}

impl ChargedSpecies {
    pub fn q_over_m(&self) -> f64 {
        self.charge / self.mass
    }
}

/// `E` and `B` at a Cartesian point, or `None` outside the map.
pub fn sample_fields(map: &FieldMap, x: &Vec3) -> Option<(Vec3, Vec3)> {
    let r = x.x.hypot(x.y);
    if !map.grid.contains(r, x.z) {
        return None;
    }
    let w = map.grid.weights(r, x.z);
    let at = |f: &[f64]| w.iter().map(|&(k, c)| c * f[k]).sum::<f64>();
    let (er, ez, br, bz) = (at(&map.er), at(&map.ez), at(&map.br), at(&map.bz));
    let (c, s) = if r > 0.0 { (x.x / r, x.y / r) } else { (1.0, 0.0) };
    Some((Vec3::new(er * c, er * s, ez), Vec3::new(br * c, br * s, bz)))
}

/// Charge density (C/m³) at the grid nodes from bilinear weighting.
pub fn deposit_charge(grid: &Grid, particles: &[Particle], species: &[ChargedSpecies]) -> Vec<f64> {
    let partials: Vec<Vec<f64>> = particles
        .par_chunks(DEPOSIT_CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; grid.len()];
            for p in chunk.iter().filter(|p| p.state().in_flight()) {
                let (r, z) = (p.radius(), p.position.z);
                if !grid.contains(r, z) {
                    continue;
                }
                let q = species[p.species.0 as usize].charge * p.weight;
                for (k, w) in grid.weights(r, z) {
                    acc[k] += q * w;
                }
            }
            acc
        })
        .collect();
    let vol = grid.node_volumes();
    let mut rho = vec![0.0; grid.len()];
    for part in &partials {
        for (a, b) in rho.iter_mut().zip(part) {
            *a += b;
        }
    }
    for (a, v) in rho.iter_mut().zip(&vol) {
        *a /= v;
    }
    rho
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicSettings {
    pub dt: f64,
    pub theta: Theta,
    pub applied_voltage: f64,
    pub cathode: CathodeBoundary,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping: f64,
    pub max_rotation: f64,
    pub poisson: PoissonSettings,
}

impl PicSettings {
    pub fn new(dt: f64, theta: Theta, applied_voltage: f64, cathode: CathodeBoundary) -> Self {
        PicSettings {
            dt,
            theta,
            applied_voltage,
            cathode,
            tolerance: 1e-6,
            max_iterations: 200,
            damping: 0.5,
            max_rotation: 0.3,
            poisson: PoissonSettings::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PicOutcome {
    pub particles: Vec<Particle>,
    pub field_map: FieldMap,
    pub iterations: usize,
    /// relative field change of each Picard iteration
    pub history: Vec<f64>,
}

/// Potential of the charge density `rho` with the cathode boundary.
pub fn solve_potential(
    grid: &Grid,
    rho: &[f64],
    settings: &PicSettings,
    initial: Option<&[f64]>,
) -> Result<Vec<f64>, PlasmaError> {
    let rhs: Vec<f64> = rho.iter().map(|q| -q / EPSILON_0).collect();
    let fixed = settings.cathode.dirichlet(grid, settings.applied_voltage);
    Ok(solve_axisymmetric(grid, &rhs, &fixed, initial, &settings.poisson)?.0)
}

fn push_all(
    start: &[Particle],
    predicted: &[Vec3],
    species: &[ChargedSpecies],
    old: &FieldMap,
    new: &FieldMap,
    push: &PushSettings,
) -> Result<Vec<Particle>, PlasmaError> {
    // particles outside the mesh fly field-free; boundary handling is the caller's
    start
        .par_iter()
        .zip(predicted.par_iter())
        .map(|(p, x_pred)| {
            let mut q = p.clone();
            if !q.is_active() {
                return Ok(q);
            }
            let sp = species[q.species.0 as usize];
            let (e_old, b) = sample_fields(old, &q.position).unwrap_or((Vec3::zeros(), Vec3::zeros()));
            let e_new = sample_fields(new, x_pred).map(|f| f.0).unwrap_or(e_old);
            let b = if sp.magnetized { b } else { Vec3::zeros() };
            push_in_place(&mut q, sp.q_over_m(), &PushFields { e_old, e_new, b }, push)?;
            Ok(q)
        })
        .collect()
}

/// One implicit step. `field_map` holds `E^n`, consistent with the
/// particles at time level `n`; the returned map holds `E^{n+1}`. Without
/// active particles the field solve is not coupled and is taken undamped.
pub fn implicit_pic_cycle(
    particles: &[Particle],
    species: &[ChargedSpecies],
    field_map: &FieldMap,
    settings: &PicSettings,
) -> Result<PicOutcome, PlasmaError> {
    let push = PushSettings { dt: settings.dt, theta: settings.theta, max_rotation: settings.max_rotation };
    let grid = &field_map.grid;
    let mut predicted: Vec<Vec3> = particles.iter().map(|p| p.position + p.velocity * settings.dt).collect();
    let mut current = field_map.clone();
    let mut history = Vec::new();
    let scale_floor = settings.applied_voltage.abs();
    for it in 1..=settings.max_iterations {
        let pushed = push_all(particles, &predicted, species, field_map, &current, &push)?;
        let rho = deposit_charge(grid, &pushed, species);
        let target = solve_potential(grid, &rho, settings, Some(&current.phi))?;
        let next: Vec<f64> = if !particles.iter().any(Particle::is_active) {
            target
        } else {
            current.phi.iter().zip(&target).map(|(a, b)| a + settings.damping * (b - a)).collect()
        };
        let change = current.phi.iter().zip(&next).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let scale = next.iter().fold(scale_floor, |m, v| m.max(v.abs()));
        let rel = if change == 0.0 { 0.0 } else { change / scale };
        history.push(rel);
        current.set_potential(next);
        predicted = pushed.iter().map(|p| p.position).collect();
        if rel <= settings.tolerance {
            let particles = push_all(particles, &predicted, species, field_map, &current, &push)?;
            return Ok(PicOutcome { particles, field_map: current, iterations: it, history });
        }
    }
    Err(PlasmaError::PicNotConverged { iterations: settings.max_iterations, history })
}
