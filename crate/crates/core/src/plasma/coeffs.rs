//! Collision-dominated transport coefficients and the drift-diffusion flux.

use super::PlasmaError;
use crate::units::BOLTZMANN;
use crate::Vec3;

/// `ω = |q| B / m`
pub fn cyclotron_frequency(q: f64, b: f64, m: f64) -> f64 {
    debug_assert!(m > 0.0);
    q.abs() * b.abs() / m
}

/// Parallel, perpendicular and cross (E×h) mobilities in m²/(V·s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobility {
    pub parallel: f64,
    pub perpendicular: f64,
    /// `None` when `B = 0`, where the cross mobility is undefined.
    pub drift: Option<f64>,
}

/// Parallel, perpendicular and cross diffusion coefficients in m²/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diffusion {
    pub parallel: f64,
    pub perpendicular: f64,
    pub drift: Option<f64>,
}

fn check(m: f64, m_eff: f64, nu: f64, b: f64) -> Result<(), PlasmaError> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(PlasmaError::Coefficient(format!("collision rate must be positive, got {nu}")));
    }
    if !(m_eff > 0.0 && m > 0.0) {
        return Err(PlasmaError::Coefficient("masses must be positive".into()));
    }
    if !(b >= 0.0 && b.is_finite()) {
        return Err(PlasmaError::Coefficient(format!("field magnitude must be finite and >= 0, got {b}")));
    }
    Ok(())
}

/// `1 + (m*ν / (mω))²`; infinite when `ω = 0`.
fn bracket(q: f64, m: f64, m_eff: f64, nu: f64, b: f64) -> f64 {
    let omega = cyclotron_frequency(q, b, m);
    if omega == 0.0 {
        return f64::INFINITY;
    }
    let x = m_eff * nu / (m * omega);
    1.0 + x * x
}

/// Mobility components. The perpendicular mobility follows the bracket as
/// written, so it tends to `μ_∥` for strong fields and to 0 for `B → 0`.
pub fn mobility_components(q: f64, m: f64, m_eff: f64, nu: f64, b: f64) -> Result<Mobility, PlasmaError> {
    check(m, m_eff, nu, b)?;
    let parallel = q.abs() / (m_eff * nu);
    let k = bracket(q, m, m_eff, nu, b);
    Ok(Mobility {
        parallel,
        perpendicular: parallel / k,
        drift: (b > 0.0).then(|| 1.0 / (b * k)),
    })
}

pub fn diffusion_components(q: f64, m: f64, m_eff: f64, nu: f64, b: f64, temperature: f64) -> Result<Diffusion, PlasmaError> {
    check(m, m_eff, nu, b)?;
    if !(temperature > 0.0) {
        return Err(PlasmaError::Coefficient(format!("temperature must be positive, got {temperature}")));
    }
    let kt = BOLTZMANN * temperature;
    let parallel = kt / (m_eff * nu);
    let k = bracket(q, m, m_eff, nu, b);
    Ok(Diffusion {
        parallel,
        perpendicular: parallel / k,
        drift: (b > 0.0).then(|| kt / (q.abs() * b * k)),
    })
}

/// Per-species coefficient set at one location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportCoeffs {
    pub mu_par: f64,
    pub mu_perp: f64,
    pub mu_drift: Option<f64>,
    pub d_par: f64,
    pub d_perp: f64,
    pub d_drift: Option<f64>,
    pub nu: f64,
    pub m_eff: f64,
    pub omega: f64,
    pub temperature: f64,
}

impl TransportCoeffs {
    pub fn new(q: f64, m: f64, m_eff: f64, nu: f64, b: f64, temperature: f64) -> Result<Self, PlasmaError> {
        let mu = mobility_components(q, m, m_eff, nu, b)?;
        let d = diffusion_components(q, m, m_eff, nu, b, temperature)?;
        Ok(TransportCoeffs {
            mu_par: mu.parallel,
            mu_perp: mu.perpendicular,
            mu_drift: mu.drift,
            d_par: d.parallel,
            d_perp: d.perpendicular,
            d_drift: d.drift,
            nu,
            m_eff,
            omega: cyclotron_frequency(q, b, m),
            temperature,
        })
    }
}

/// Charge polarity of the transported species.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn of(charge: f64) -> Self {
        if charge < 0.0 {
            Polarity::Negative
        } else {
            Polarity::Positive
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => -1.0,
        }
    }
}

/// Drift-diffusion flux (m⁻²s⁻¹) with the field and the density gradient
/// split along and across the unit field direction `h`. An undefined cross
/// coefficient (zero field) contributes nothing.
pub fn drift_diffusion_flux(
    n: f64,
    grad_n: &Vec3,
    e: &Vec3,
    h: &Vec3,
    coeffs: &TransportCoeffs,
    polarity: Polarity,
) -> Result<Vec3, PlasmaError> {
    if ((h.norm() - 1.0).abs()) > 1e-9 {
        return Err(PlasmaError::Coefficient(format!("field direction must be a unit vector, |h| = {}", h.norm())));
    }
    let e_par = h * h.dot(e);
    let e_perp = e - e_par;
    let g_par = h * h.dot(grad_n);
    let g_perp = grad_n - g_par;
    let drift = e_par * coeffs.mu_par + e_perp * coeffs.mu_perp + e.cross(h) * coeffs.mu_drift.unwrap_or(0.0);
    Ok(drift * (polarity.sign() * n) - g_par * coeffs.d_par - g_perp * coeffs.d_perp
        + h.cross(grad_n) * coeffs.d_drift.unwrap_or(0.0))
}
