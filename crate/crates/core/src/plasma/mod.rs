//! Charged-particle physics of the discharge: transport coefficients,
//! the θ-scheme push, Monte Carlo collisions, secondary emission, the
//! fluid continuity update and the implicit PIC cycle, plus the two plasma
//! stage backends built from them.

mod coeffs;
mod collisions;
mod continuity;
mod fluid;
mod kinetic;
mod pic;
mod push;

use thiserror::Error;

pub use coeffs::{
    cyclotron_frequency, diffusion_components, drift_diffusion_flux, mobility_components, Diffusion, Mobility,
    Polarity, TransportCoeffs,
};
pub use collisions::{
    elastic_loss_fraction, mcc_collide, secondaries_for_ion, secondary_emission, CollisionEvent, CollisionSet,
    EventKind, IonizationProducts, ScatteringModel,
};
pub use fluid::{maxwellian_rate, run_fluid};
pub use continuity::{continuity_step, net_outflow, total_particles, ContinuityOutcome, DensityBoundary};
pub use kinetic::{plasma_grid, run_kinetic, DiagnosticRow, PlasmaOutput, PlasmaSetup, ELECTRON, ION};
pub use pic::{deposit_charge, implicit_pic_cycle, sample_fields, solve_potential, ChargedSpecies, PicOutcome, PicSettings};
pub use push::{push_in_place, push_particle, stagger_velocity, PushFields, PushSettings};

use crate::fields::FieldError;
use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum PlasmaError {
    #[error("time step {dt:e} s resolves the gyration too coarsely (ω·Δt = {omega_dt:.3} >= {limit})")]
    Resolution { dt: f64, omega_dt: f64, limit: f64 },
    #[error("collision probability per step too high at Δt = {dt:e} s (ν·Δt = {nu_dt:.3} > {limit})")]
    CollisionGuard { dt: f64, nu_dt: f64, limit: f64 },
    #[error("no cross-section table for {projectile} on {target}")]
    MissingTable { projectile: String, target: String },
    #[error("collision set: {0}")]
    Collision(String),
    #[error("transport coefficients: {0}")]
    Coefficient(String),
    #[error("field shapes: {0}")]
    Shape(String),
    #[error("implicit cycle did not converge in {iterations} iterations (last change {:e})", history.last().copied().unwrap_or(f64::NAN))]
    PicNotConverged { iterations: usize, history: Vec<f64> },
    #[error("plasma stage: {0}")]
    Stage(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
