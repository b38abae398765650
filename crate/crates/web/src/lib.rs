//! Browser bindings for three small sputtersim experiments. Every export
//! returns a flat `Float64Array` of interleaved pairs so the page can plot
//! it without any glue.

use sputtersim::deposition::{self, Binning, SurfaceMesh};
use sputtersim::fields::Theta;
use sputtersim::model::{
    Chamber, DepositionConfig, EmittedAtom, GasState, Particle, RngStream, Species, SpeciesId, Table1D, ThermalizedMode,
    TransportConfig,
};
use sputtersim::plasma::{push_in_place, stagger_velocity, PushFields, PushSettings};
use sputtersim::sputter::{direction_from, emission_angles, EmissionModel};
use sputtersim::transport::{rho_max, run_transport, scattering_angle, PotentialModel, TransportModel};
use sputtersim::units::{speed_from_ev, AMU, ELECTRON_MASS, ELEMENTARY_CHARGE};
use sputtersim::Vec3;
use wasm_bindgen::prelude::*;

/// Larmor radius (m) of an electron of `energy_ev` in `b_tesla`.
#[wasm_bindgen]
pub fn gyro_radius(b_tesla: f64, energy_ev: f64) -> f64 {
    ELECTRON_MASS * speed_from_ev(energy_ev, ELECTRON_MASS) / (ELEMENTARY_CHARGE * b_tesla)
}

/// Electron orbit in a uniform axial field, pushed with the θ-scheme:
/// `[x0, y0, x1, y1, ...]` in metres, one point per step.
#[wasm_bindgen]
pub fn gyro_orbit(b_tesla: f64, energy_ev: f64, steps_per_turn: u32, turns: u32, theta: f64) -> Result<Vec<f64>, String> {
    if !(b_tesla > 0.0 && energy_ev > 0.0) {
        return Err("field and energy must be positive".into());
    }
    let omega = ELEMENTARY_CHARGE * b_tesla / ELECTRON_MASS;
    let dt = std::f64::consts::TAU / (omega * steps_per_turn.max(1) as f64);
    let theta = Theta::new(theta).map_err(|e| e.to_string())?;
    let mut settings = PushSettings::new(dt, theta);
    // a coarse step is the point of the demo, so allow nearly a radian
    settings.max_rotation = 1.0;
    let fields = PushFields::steady(Vec3::zeros(), Vec3::new(0.0, 0.0, b_tesla));
    let q_m = -ELEMENTARY_CHARGE / ELECTRON_MASS;
    let v0 = Vec3::new(speed_from_ev(energy_ev, ELECTRON_MASS), 0.0, 0.0);
    let v = stagger_velocity(&v0, q_m, &fields.e_old, &fields.b, &settings).map_err(|e| e.to_string())?;
    let mut p = Particle::new(SpeciesId(0), Vec3::zeros(), v, 1.0).map_err(|e| e.to_string())?;
    let n = steps_per_turn as usize * turns as usize;
    let mut out = Vec::with_capacity(2 * (n + 1));
    out.extend([0.0, 0.0]);
    for _ in 0..n {
        push_in_place(&mut p, q_m, &fields, &settings).map_err(|e| e.to_string())?;
        out.extend([p.position.x, p.position.y]);
    }
    Ok(out)
}

fn potential(name: &str) -> Result<PotentialModel, String> {
    Ok(match name {
        "hard-sphere" => PotentialModel::HardSphere { radius: 2.9e-10, strength: 20.0 },
        "born-mayer" => PotentialModel::BornMayer { a: 2.0e4, b: 3.5e10, r_inner: 0.5e-10, r_outer: 4.0e-10 },
        "lennard-jones" => PotentialModel::LennardJones { epsilon: 0.05, sigma: 2.9e-10 },
        "universal" => PotentialModel::UniversalModified { epsilon: 0.05, sigma: 2.9e-10, z1: 29, z2: 18 },
        other => return Err(format!("unknown potential `{other}`")),
    })
}

/// Cu-Ar scattering angle against impact parameter at `e_cm` eV:
/// `[ρ (Å), χ (rad), ...]` over `points` values up to the interaction cutoff.
#[wasm_bindgen]
pub fn deflection_curve(name: &str, e_cm: f64, points: u32) -> Result<Vec<f64>, String> {
    let model = potential(name)?;
    if !(e_cm > 0.0) {
        return Err("energy must be positive".into());
    }
    let top = rho_max(&model, e_cm).max(model.length_scale());
    let n = points.max(2) as usize;
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        let rho = top * (i as f64 + 0.5) / n as f64;
        let chi = scattering_angle(&model, e_cm, rho).map_err(|e| e.to_string())?;
        out.extend([rho * 1e10, chi]);
    }
    Ok(out)
}

/// Copper film profile on the substrate of the default chamber for atoms
/// sputtered from a racetrack ring by 300 eV argon ions:
/// `[r (mm), relative thickness, ...]` per radial band, normalised to the
/// thickest band. `pressure_pa = 0` transports through vacuum.
#[wasm_bindgen]
pub fn deposition_profile(pressure_pa: f64, atoms: u32, seed: u32) -> Result<Vec<f64>, String> {
    let chamber = Chamber::default();
    let dep = DepositionConfig::default();
    let mesh = SurfaceMesh::chamber(&chamber, &dep).map_err(|e| e.to_string())?;
    let gas = if pressure_pa > 0.0 {
        Some(GasState::uniform_argon(pressure_pa, 300.0).map_err(|e| e.to_string())?)
    } else {
        None
    };
    let cfg = TransportConfig { thermalized: ThermalizedMode::MonteCarlo, max_collisions: 2000, ..TransportConfig::default() };
    let lj = PotentialModel::LennardJones { epsilon: 0.05, sigma: 2.9e-10 };
    let model =
        TransportModel::new(lj, Species::copper(), gas, Species::argon().mass, &cfg).map_err(|e| e.to_string())?;
    let yields = Table1D::new(vec![(0.0, 1.0), (1000.0, 1.0)]).map_err(|e| e.to_string())?;
    let emission =
        EmissionModel::new(Species::copper(), 39.948 * AMU, 3.49, yields, None).map_err(|e| e.to_string())?;

    let seed = seed as u64;
    let mut rng = RngStream::new(seed, 0);
    let emitted: Vec<EmittedAtom> = (0..atoms)
        .map(|_| {
            let a = std::f64::consts::TAU * rng.uniform();
            let r = 0.025 + 0.004 * rng.normal();
            let e0 = emission.sample_energy(300.0, &mut rng);
            let (theta, phi) = emission_angles(rng.uniform(), rng.uniform());
            let v = direction_from(&Vec3::z(), theta, phi) * speed_from_ev(e0, emission.target.mass);
            EmittedAtom::new(Vec3::new(r * a.cos(), r * a.sin(), chamber.target_z), v, 1.0)
        })
        .collect();
    let out = run_transport(&model, &mesh, &emitted, seed).map_err(|e| e.to_string())?;
    let bins = Binning::new(16, 0.0, 100.0).map_err(|e| e.to_string())?;
    let tally =
        deposition::deposit(&mesh, &out.arrivals, Species::copper().mass, 16, bins).map_err(|e| e.to_string())?;
    let d = deposition::distributions(&tally, &mesh, "substrate", dep.atomic_volume).map_err(|e| e.to_string())?;
    let peak = d.profile.iter().map(|b| b.thickness).fold(0.0, f64::max);
    Ok(d.profile
        .iter()
        .flat_map(|b| [0.5e3 * (b.lo + b.hi), if peak > 0.0 { b.thickness / peak } else { 0.0 }])
        .collect())
}
