use crate::deposition::{Hit, SurfaceMesh};
use crate::model::{GasState, Particle, ParticleState, RngStream};
use crate::units::BOLTZMANN;
use crate::Vec3;

use super::TransportError;

/// Exponential flight length with mean `1/(n σ)`, using the densest cell of
/// the gas. Where the local density is lower the caller rejects the
/// collision with probability `1 − n(x)/n_max`.
pub fn free_flight_sample(gas: &GasState, sigma_total: f64, rng: &mut RngStream) -> Result<f64, TransportError> {
    flight_length(gas.max_density(), sigma_total, rng)
}

pub fn flight_length(density: f64, sigma_total: f64, rng: &mut RngStream) -> Result<f64, TransportError> {
    let k = density * sigma_total;
    if !(k > 0.0 && k.is_finite()) {
        return Err(TransportError::Flight(format!("n·σ must be positive, got n = {density}, σ = {sigma_total}")));
    }
    Ok(-rng.uniform_open().ln() / k)
}

/// `|K − 3/2 k_B T| ≤ σ_th k_B T` at the particle's position.
pub fn thermalization_check(p: &Particle, mass: f64, gas: &GasState, width: f64) -> bool {
    let kt = BOLTZMANN * gas.temperature_at(&p.position);
    (p.kinetic_energy(mass) - 1.5 * kt).abs() <= width * kt
}

/// Chapman–Enskog binary diffusion coefficient for a hard-sphere cross
/// section `sigma` (m²): `D = 3/(16 n σ) √(2π k_B T/μ)`.
pub fn kinetic_diffusion_coefficient(density: f64, sigma: f64, temperature: f64, reduced_mass: f64) -> f64 {
    3.0 / (16.0 * density * sigma) * (2.0 * std::f64::consts::PI * BOLTZMANN * temperature / reduced_mass).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WalkOutcome {
    /// crossed a surface; the particle sits on the hit point
    Arrived(Hit),
    /// step budget used up, still in the gas
    Stalled,
}

/// Gaussian random walk with per-axis variance `2DΔt` per step, for at most
/// `max_steps` steps. On arrival the particle's velocity is set along the
/// last step with the thermal energy `3/2 k_B T`.
#[allow(clippy::too_many_arguments)]
pub fn diffuse_walk(
    p: &mut Particle,
    mesh: &SurfaceMesh,
    gas: &GasState,
    mass: f64,
    diffusion: f64,
    dt: f64,
    max_steps: usize,
    rng: &mut RngStream,
) -> Result<(WalkOutcome, usize), TransportError> {
    if p.state() != ParticleState::Thermalized {
        return Err(TransportError::Flight(format!("diffusion needs a thermalized particle, state is {:?}", p.state())));
    }
    if !(diffusion >= 0.0 && dt > 0.0) {
        return Err(TransportError::Flight(format!("bad diffusion step: D = {diffusion}, dt = {dt}")));
    }
    if diffusion == 0.0 {
        return Ok((WalkOutcome::Stalled, 0));
    }
    let s = (2.0 * diffusion * dt).sqrt();
    for step in 1..=max_steps {
        let d = Vec3::new(s * rng.normal(), s * rng.normal(), s * rng.normal());
        let len = d.norm();
        if len == 0.0 {
            continue;
        }
        let dir = d / len;
        if let Some(hit) = mesh.first_hit(&p.position, &dir, len) {
            p.position = hit.point;
            let speed = (3.0 * BOLTZMANN * gas.temperature_at(&hit.point) / mass).sqrt();
            p.velocity = dir * speed;
            return Ok((WalkOutcome::Arrived(hit), step));
        }
        p.position += d;
    }
    Ok((WalkOutcome::Stalled, max_steps))
}
