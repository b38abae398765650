//! External and self-consistent fields: magnet loops, the analytic
//! sheath/pre-sheath potential, the effective potential, the axisymmetric
//! Poisson solver and the θ-averaging rule.

mod grid;
mod magnet;
mod poisson;
mod sheath;

use std::ops::{Add, Mul};

use thiserror::Error;

pub use grid::{FieldMap, Grid, FIELD_MAP_HEADER};
pub use magnet::{complete_elliptic, CurrentLoop, MagnetSpec, NOMINAL_TARGET_FIELD_T};
pub use poisson::{poisson_solve, solve_axisymmetric, CathodeBoundary, PoissonReport, PoissonSettings};
pub use sheath::SheathModel;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("point (r = {r}, z = {z}) lies on a current filament")]
    OnFilament { r: f64, z: f64 },
    #[error("point (r = {r}, z = {z}) lies outside the field domain")]
    OutsideDomain { r: f64, z: f64 },
    #[error("theta = {0} outside [1/2, 1]; the time-centred scheme is unstable below 1/2")]
    UnstableTheta(f64),
    #[error("z = {z} outside the sheath [0, {thickness}]")]
    OutsideSheath { z: f64, thickness: f64 },
    #[error("sheath model: {0}")]
    BadSheath(String),
    #[error("effective potential is singular on the axis (r = 0)")]
    OnAxis,
    #[error("Poisson solver did not reach {tolerance:e} within {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64, tolerance: f64 },
    #[error("grid: {0}")]
    Grid(String),
    #[error("field map: {0}")]
    Map(String),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

/// Implicitness parameter of the time-centred scheme, `θ ∈ [1/2, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Theta(f64);

impl Theta {
    pub const HALF: Theta = Theta(0.5);
    pub const ONE: Theta = Theta(1.0);

    pub fn new(theta: f64) -> Result<Self, FieldError> {
        if (0.5..=1.0).contains(&theta) {
            Ok(Theta(theta))
        } else {
            Err(FieldError::UnstableTheta(theta))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// `Q^{n+θ} = (1-θ) Q^n + θ Q^{n+1}`
    pub fn average<T>(self, q_n: T, q_np1: T) -> T
    where
        T: Mul<f64, Output = T> + Add<Output = T>,
    {
        q_n * (1.0 - self.0) + q_np1 * self.0
    }
}

pub fn theta_average(q_n: f64, q_np1: f64, theta: f64) -> Result<f64, FieldError> {
    Ok(Theta::new(theta)?.average(q_n, q_np1))
}

/// Effective potential (J) of a charge `q` (C), mass `m` (kg) with canonical
/// angular momentum `p_theta` (kg·m²/s) at radius `r` (m), given the
/// azimuthal vector potential `a_theta` (T·m) and electric potential `phi` (V).
pub fn effective_potential(p_theta: f64, a_theta: f64, r: f64, phi: f64, q: f64, m: f64) -> Result<f64, FieldError> {
    if r <= 0.0 {
        return Err(FieldError::OnAxis);
    }
    let l = p_theta - a_theta * r * q;
    Ok(l * l / (2.0 * m * r * r) + q * phi)
}
