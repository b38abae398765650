//! Direction rotations and two-body elastic kinematics shared by the
//! plasma collision operator and neutral transport.

use crate::Vec3;

/// Rotates `v` by the polar angle `chi` about its own direction, with
/// `azimuth` fixing the plane of deflection. Preserves `|v|`.
pub fn deflect(v: &Vec3, chi: f64, azimuth: f64) -> Vec3 {
    let speed = v.norm();
    if speed == 0.0 {
        return *v;
    }
    let d = v / speed;
    // any unit vector orthogonal to d
    let helper = if d.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = d.cross(&helper).normalize();
    let e2 = d.cross(&e1);
    let (s, c) = chi.sin_cos();
    let (sa, ca) = azimuth.sin_cos();
    speed * (c * d + s * (ca * e1 + sa * e2))
}

/// Rodrigues rotation of `v` by `angle` about the unit vector `axis`.
#[inline]
pub fn rotate_about(v: &Vec3, axis: &Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    v * c + axis.cross(v) * s + axis * (axis.dot(v) * (1.0 - c))
}

/// Post-collision velocities of an elastic binary collision in which the
/// relative velocity is deflected by the centre-of-mass angle `chi`.
pub fn elastic_binary(v1: &Vec3, m1: f64, v2: &Vec3, m2: f64, chi: f64, azimuth: f64) -> (Vec3, Vec3) {
    let mt = m1 + m2;
    let cm = (v1 * m1 + v2 * m2) / mt;
    let g = v1 - v2;
    let g_out = deflect(&g, chi, azimuth);
    (cm + g_out * (m2 / mt), cm - g_out * (m1 / mt))
}

/// Centre-of-mass kinetic energy (J) of a pair.
pub fn centre_of_mass_energy(v1: &Vec3, m1: f64, v2: &Vec3, m2: f64) -> f64 {
    let mu = m1 * m2 / (m1 + m2);
    0.5 * mu * (v1 - v2).norm_squared()
}
