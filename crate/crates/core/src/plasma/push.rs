//! θ-scheme particle push with an exact magnetic rotation.
//!
//! Velocities live on half steps: a pushed particle carries `v^{n+1/2}`
//! and `x^{n+1} = x^n + v^{n+1/2} Δt`. The electric impulse is split
//! around the rotation (Boris ordering) and uses the θ-averaged field
//! `E^{n+θ} = (1-θ)E^n + θE^{n+1}`. The rotation angle is exactly
//! `ωΔt`, so a pure magnetic field leaves `|v|` unchanged up to roundoff.

use super::PlasmaError;
use crate::fields::Theta;
use crate::kinematics::rotate_about;
use crate::model::Particle;
use crate::Vec3;

/// Fields seen by a particle during one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushFields {
    pub e_old: Vec3,
    pub e_new: Vec3,
    pub b: Vec3,
}

impl PushFields {
    pub fn steady(e: Vec3, b: Vec3) -> Self {
        PushFields { e_old: e, e_new: e, b }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushSettings {
    pub dt: f64,
    pub theta: Theta,
    /// Upper bound on `ωΔt`.
    pub max_rotation: f64,
}

impl PushSettings {
    pub fn new(dt: f64, theta: Theta) -> Self {
        PushSettings { dt, theta, max_rotation: 0.3 }
    }
}

fn rotation_angle(q_over_m: f64, b: &Vec3, settings: &PushSettings) -> Result<(f64, Vec3), PlasmaError> {
    let bmag = b.norm();
    if bmag == 0.0 {
        return Ok((0.0, Vec3::z()));
    }
    let omega_dt = q_over_m.abs() * bmag * settings.dt;
    if omega_dt >= settings.max_rotation {
        return Err(PlasmaError::Resolution { dt: settings.dt, omega_dt, limit: settings.max_rotation });
    }
    // dv/dt = (q/m) v × B rotates v about B by -(q/m)|B| t
    Ok((-q_over_m * bmag * settings.dt, b / bmag))
}

/// Advances velocity and position of one particle by one step.
pub fn push_particle(p: &Particle, q_over_m: f64, fields: &PushFields, settings: &PushSettings) -> Result<Particle, PlasmaError> {
    let mut out = p.clone();
    push_in_place(&mut out, q_over_m, fields, settings)?;
    Ok(out)
}

pub fn push_in_place(p: &mut Particle, q_over_m: f64, fields: &PushFields, settings: &PushSettings) -> Result<(), PlasmaError> {
    let (angle, axis) = rotation_angle(q_over_m, &fields.b, settings)?;
    let e = settings.theta.average(fields.e_old, fields.e_new);
    let kick = e * (0.5 * q_over_m * settings.dt);
    let mut v = p.velocity + kick;
    if angle != 0.0 {
        v = rotate_about(&v, &axis, angle);
    }
    v += kick;
    p.velocity = v;
    p.position += v * settings.dt;
    Ok(())
}

/// Moves a velocity given at the integer time level back by half a step,
/// so that a subsequent sequence of pushes is centred.
pub fn stagger_velocity(v: &Vec3, q_over_m: f64, e: &Vec3, b: &Vec3, settings: &PushSettings) -> Result<Vec3, PlasmaError> {
    let (angle, axis) = rotation_angle(q_over_m, b, settings)?;
    let mut w = *v;
    if angle != 0.0 {
        w = rotate_about(&w, &axis, -0.5 * angle);
    }
    Ok(w - e * (0.5 * q_over_m * settings.dt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SpeciesId;
    use crate::units::{ELECTRON_MASS, ELEMENTARY_CHARGE};

    fn particle(v: Vec3) -> Particle {
        Particle::new(SpeciesId(0), Vec3::zeros(), v, 1.0).unwrap()
    }

    #[test]
    fn free_flight() {
        let s = PushSettings::new(1e-9, Theta::HALF);
        let p = particle(Vec3::new(1.0, 2.0, 3.0));
        let q = push_particle(&p, 1.0, &PushFields::steady(Vec3::zeros(), Vec3::zeros()), &s).unwrap();
        assert_eq!(q.velocity, p.velocity);
        assert!((q.position - p.velocity * 1e-9).norm() < 1e-24);
    }

    #[test]
    fn guard_names_the_step() {
        let qm = -ELEMENTARY_CHARGE / ELECTRON_MASS;
        let s = PushSettings::new(1e-9, Theta::HALF);
        let err = push_particle(&particle(Vec3::x()), qm, &PushFields::steady(Vec3::zeros(), Vec3::new(0.0, 0.0, 0.02)), &s)
            .unwrap_err();
        match err {
            PlasmaError::Resolution { dt, .. } => assert_eq!(dt, 1e-9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pure_magnetic_field_preserves_speed_per_step() {
        let qm = -ELEMENTARY_CHARGE / ELECTRON_MASS;
        let s = PushSettings::new(2e-12, Theta::HALF);
        let f = PushFields::steady(Vec3::zeros(), Vec3::new(0.003, -0.001, 0.02));
        let mut p = particle(Vec3::new(1.2e6, -3.0e5, 4.0e5));
        for _ in 0..1000 {
            let before = p.velocity.norm();
            push_in_place(&mut p, qm, &f, &s).unwrap();
            assert!((p.velocity.norm() - before).abs() <= 1e-10 * before);
        }
    }

    #[test]
    fn electron_gyrates_counter_clockwise_about_b() {
        // electrons rotate right-handed about B
        let qm = -ELEMENTARY_CHARGE / ELECTRON_MASS;
        let s = PushSettings::new(1e-12, Theta::HALF);
        let f = PushFields::steady(Vec3::zeros(), Vec3::new(0.0, 0.0, 0.02));
        let p = push_particle(&particle(Vec3::x() * 1e6), qm, &f, &s).unwrap();
        assert!(p.velocity.y > 0.0);
    }

    #[test]
    fn theta_weights_the_new_field() {
        let s = PushSettings::new(1.0, Theta::ONE);
        let f = PushFields { e_old: Vec3::x(), e_new: Vec3::y(), b: Vec3::zeros() };
        let p = push_particle(&particle(Vec3::zeros()), 1.0, &f, &s).unwrap();
        assert!((p.velocity - Vec3::y()).norm() < 1e-15);
    }
}
