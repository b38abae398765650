use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{FieldError, FieldMap};
use crate::model::{Chamber, LoopConfig, MagnetConfig};
use crate::units::MU_0;

/// Field magnitude near the target that a magnetron magnet pack is expected
/// to deliver (200 G).
pub const NOMINAL_TARGET_FIELD_T: f64 = 0.02;

/// Complete elliptic integrals `(K(m), E(m))` of parameter `m = k²`,
/// by the arithmetic-geometric mean.
pub fn complete_elliptic(m: f64) -> (f64, f64) {
    debug_assert!((0.0..1.0).contains(&m));
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    let mut c = m.sqrt();
    let mut sum = 0.5 * c * c;
    let mut pow = 0.5;
    for _ in 0..64 {
        if c.abs() <= f64::EPSILON * a {
            break;
        }
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        pow *= 2.0;
        sum += pow * c * c;
    }
    let k = PI / (2.0 * a);
    (k, k * (1.0 - sum))
}

/// Circular filament of radius `radius` on the axis at height `z`
/// carrying `current` (A, positive counter-clockwise seen from +z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentLoop {
    pub radius: f64,
    pub z: f64,
    pub current: f64,
}

impl From<&LoopConfig> for CurrentLoop {
    fn from(c: &LoopConfig) -> Self {
        CurrentLoop { radius: c.radius, z: c.z, current: c.current }
    }
}

impl CurrentLoop {
    fn check(&self, r: f64, z: f64) -> Result<(), FieldError> {
        let d = (r - self.radius).hypot(z - self.z);
        if d <= 1e-9 * self.radius {
            return Err(FieldError::OnFilament { r, z });
        }
        Ok(())
    }

    /// `(B_r, B_z)` in T.
    pub fn field(&self, r: f64, z: f64) -> Result<(f64, f64), FieldError> {
        self.check(r, z)?;
        let a = self.radius;
        let dz = z - self.z;
        let c = MU_0 * self.current;
        if r < 1e-6 * a {
            let s2 = a * a + dz * dz;
            let bz = c * a * a / (2.0 * s2.powf(1.5));
            let br = 3.0 * c * a * a * dz * r / (4.0 * s2.powf(2.5));
            return Ok((br, bz));
        }
        let alpha2 = (a - r).powi(2) + dz * dz;
        let beta2 = (a + r).powi(2) + dz * dz;
        let beta = beta2.sqrt();
        let m = 4.0 * a * r / beta2;
        let (k, e) = complete_elliptic(m);
        let bz = c / (2.0 * PI * alpha2 * beta) * ((a * a - r * r - dz * dz) * e + alpha2 * k);
        let br = c * dz / (2.0 * PI * alpha2 * beta * r) * ((a * a + r * r + dz * dz) * e - alpha2 * k);
        Ok((br, bz))
    }

    /// Azimuthal vector potential `A_θ` in T·m.
    pub fn vector_potential(&self, r: f64, z: f64) -> Result<f64, FieldError> {
        self.check(r, z)?;
        let a = self.radius;
        let dz = z - self.z;
        if r < 1e-6 * a {
            let s2 = a * a + dz * dz;
            return Ok(MU_0 * self.current * a * a * r / (4.0 * s2.powf(1.5)));
        }
        let beta2 = (a + r).powi(2) + dz * dz;
        let m = 4.0 * a * r / beta2;
        let (k, e) = complete_elliptic(m);
        let kk = m.sqrt();
        Ok(MU_0 * self.current / (PI * kk) * (a / r).sqrt() * ((1.0 - 0.5 * m) * k - e))
    }
}

/// Static magnetic field source: a superposition of coaxial loops or a
/// tabulated map (bilinear interpolation).
#[derive(Debug, Clone)]
pub enum MagnetSpec {
    Loops(Vec<CurrentLoop>),
    Map(FieldMap),
}

impl MagnetSpec {
    pub fn from_config(cfg: &MagnetConfig) -> Result<Self, FieldError> {
        match &cfg.field_map {
            Some(path) => Ok(MagnetSpec::Map(FieldMap::read_magnetic_csv(path)?)),
            None => Ok(MagnetSpec::Loops(cfg.loops.iter().map(CurrentLoop::from).collect())),
        }
    }

    /// `(B_r, B_z)` in T at `(r, z)`.
    pub fn magnetic_field_at(&self, r: f64, z: f64) -> Result<(f64, f64), FieldError> {
        match self {
            MagnetSpec::Loops(loops) => loops.iter().try_fold((0.0, 0.0), |(br, bz), l| {
                let (dr, dz) = l.field(r, z)?;
                Ok((br + dr, bz + dz))
            }),
            MagnetSpec::Map(map) => map.sample_b(r, z),
        }
    }

    pub fn vector_potential_at(&self, r: f64, z: f64) -> Result<f64, FieldError> {
        match self {
            MagnetSpec::Loops(loops) => loops.iter().try_fold(0.0, |acc, l| Ok(acc + l.vector_potential(r, z)?)),
            MagnetSpec::Map(map) => map.sample_a_theta(r, z),
        }
    }

    /// Largest |B| just above the target face. Logs a warning when it
    /// differs from 200 G by more than a factor of two.
    pub fn check_target_field(&self, chamber: &Chamber) -> Result<f64, FieldError> {
        let z = chamber.target_z + 1e-3;
        let mut peak: f64 = 0.0;
        for k in 0..=200 {
            let r = chamber.target_radius * k as f64 / 200.0;
            let (br, bz) = self.magnetic_field_at(r, z)?;
            peak = peak.max(br.hypot(bz));
        }
        let ratio = peak / NOMINAL_TARGET_FIELD_T;
        if !(0.5..=2.0).contains(&ratio) {
            log::warn!("peak |B| above the target is {:.1} G, far from the nominal 200 G", peak * 1e4);
        }
        Ok(peak)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lone_loop() -> CurrentLoop {
        CurrentLoop { radius: 0.03, z: -0.02, current: 1000.0 }
    }

    #[test]
    fn elliptic_reference_values() {
        // K(0) = E(0) = π/2; K(1/2), E(1/2) from Abramowitz & Stegun table 17.1
        let (k0, e0) = complete_elliptic(0.0);
        assert!((k0 - PI / 2.0).abs() < 1e-15 && (e0 - PI / 2.0).abs() < 1e-15);
        let (k, e) = complete_elliptic(0.5);
        assert!((k - 1.854_074_677_301_372).abs() < 1e-13);
        assert!((e - 1.350_643_881_047_675).abs() < 1e-13);
    }

    #[test]
    fn on_axis_field_matches_textbook_formula() {
        let l = lone_loop();
        for h in [0.0, 0.005, 0.02, 0.1] {
            let (br, bz) = l.field(0.0, l.z + h).unwrap();
            let oracle = MU_0 * l.current * l.radius.powi(2) / (2.0 * (l.radius.powi(2) + h * h).powf(1.5));
            assert_eq!(br, 0.0);
            assert!((bz - oracle).abs() <= 1e-12 * oracle.abs());
            // the elliptic branch agrees with the axis expansion just off axis
            let (_, bz_off) = l.field(1e-4 * l.radius, l.z + h).unwrap();
            assert!((bz_off - oracle).abs() <= 1e-6 * oracle.abs());
        }
    }

    #[test]
    fn filament_is_rejected() {
        let l = lone_loop();
        assert!(matches!(l.field(l.radius, l.z), Err(FieldError::OnFilament { .. })));
        assert!(matches!(l.vector_potential(l.radius, l.z), Err(FieldError::OnFilament { .. })));
    }

    #[test]
    fn curl_of_gridded_vector_potential_matches_field() {
        // A_θ sampled on a 128 x 128 grid away from the filament, curl by
        // central differences: B_r = -dA/dz, B_z = (1/r) d(rA)/dr
        let spec = MagnetSpec::Loops(vec![lone_loop()]);
        let n = 128;
        let (r0, r1, z0, z1) = (0.002, 0.08, 0.0, 0.06);
        let hr = (r1 - r0) / (n - 1) as f64;
        let hz = (z1 - z0) / (n - 1) as f64;
        let a: Vec<f64> = (0..n * n)
            .map(|k| {
                let (i, j) = (k % n, k / n);
                spec.vector_potential_at(r0 + i as f64 * hr, z0 + j as f64 * hz).unwrap()
            })
            .collect();
        let mut worst: f64 = 0.0;
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                let r = r0 + i as f64 * hr;
                let z = z0 + j as f64 * hz;
                let br = -(a[(j + 1) * n + i] - a[(j - 1) * n + i]) / (2.0 * hz);
                let ra = |ii: usize| (r0 + ii as f64 * hr) * a[j * n + ii];
                let bz = (ra(i + 1) - ra(i - 1)) / (2.0 * hr * r);
                let (br_d, bz_d) = spec.magnetic_field_at(r, z).unwrap();
                let scale = br_d.hypot(bz_d);
                worst = worst.max(((br - br_d).hypot(bz - bz_d)) / scale);
            }
        }
        assert!(worst < 1e-3, "worst relative curl mismatch {worst}");
    }

    fn divergence(spec: &MagnetSpec, r: f64, z: f64) -> (f64, f64) {
        let h = 1e-5 * r.max(1e-3);
        let (brp, _) = spec.magnetic_field_at(r + h, z).unwrap();
        let (brm, _) = spec.magnetic_field_at(r - h, z).unwrap();
        let (_, bzp) = spec.magnetic_field_at(r, z + h).unwrap();
        let (_, bzm) = spec.magnetic_field_at(r, z - h).unwrap();
        let div = ((r + h) * brp - (r - h) * brm) / (2.0 * h * r) + (bzp - bzm) / (2.0 * h);
        let scale = (brp.abs() + brm.abs()) / (2.0 * r) + ((brp - brm).abs() + (bzp - bzm).abs()) / (2.0 * h);
        (div, scale)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn field_is_divergence_free(
            a1 in 0.005f64..0.05, z1 in -0.03f64..0.0, i1 in -5e3f64..5e3,
            a2 in 0.005f64..0.05, i2 in -5e3f64..5e3,
            r in 0.003f64..0.08, z in 0.002f64..0.08,
        ) {
            let spec = MagnetSpec::Loops(vec![
                CurrentLoop { radius: a1, z: z1, current: i1 },
                CurrentLoop { radius: a2, z: z1 - 0.005, current: i2 },
            ]);
            let (div, scale) = divergence(&spec, r, z);
            prop_assert!(div.abs() <= 1e-6 * scale, "div {div} scale {scale}");
        }
    }

    #[test]
    fn default_magnets_are_near_200_gauss() {
        let spec = MagnetSpec::from_config(&MagnetConfig::default()).unwrap();
        let peak = spec.check_target_field(&Chamber::default()).unwrap();
        assert!(peak > 0.5 * NOMINAL_TARGET_FIELD_T && peak < 2.0 * NOMINAL_TARGET_FIELD_T, "peak {peak}");
    }
}
