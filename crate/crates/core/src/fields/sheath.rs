use super::FieldError;

/// Analytic cathode sheath: a space-charge-limited (Child's law) potential
/// `φ(z) = -V (1 - z/d)^{4/3}` for `0 ≤ z ≤ d`, with `z` measured from the
/// cathode, followed by a uniform pre-sheath potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SheathModel {
    /// m
    pub thickness: f64,
    /// V, magnitude of the cathode bias
    pub applied_voltage: f64,
    /// V, constant potential past the sheath edge
    pub presheath_drop: f64,
}

impl SheathModel {
    pub fn new(thickness: f64, applied_voltage: f64, presheath_drop: f64) -> Result<Self, FieldError> {
        if !(thickness > 0.0 && thickness.is_finite()) {
            return Err(FieldError::BadSheath(format!("thickness must be positive, got {thickness}")));
        }
        if presheath_drop != 0.0 && !(presheath_drop.abs() < 0.1 * applied_voltage.abs()) {
            return Err(FieldError::BadSheath("pre-sheath drop must be small against the applied voltage".into()));
        }
        Ok(SheathModel { thickness, applied_voltage, presheath_drop })
    }

    pub fn sheath_potential(&self, z: f64) -> Result<f64, FieldError> {
        if !(0.0..=self.thickness).contains(&z) {
            return Err(FieldError::OutsideSheath { z, thickness: self.thickness });
        }
        Ok(-self.applied_voltage * (1.0 - z / self.thickness).powf(4.0 / 3.0))
    }

    /// Potential for `z > d`; uniform.
    pub fn presheath_potential(&self, _z: f64) -> f64 {
        self.presheath_drop
    }

    /// Sheath below `d`, pre-sheath above; `z < 0` is clamped to the cathode.
    pub fn potential(&self, z: f64) -> f64 {
        if z <= self.thickness {
            -self.applied_voltage * (1.0 - z.max(0.0) / self.thickness).powf(4.0 / 3.0)
        } else {
            self.presheath_drop
        }
    }

    /// `E_z = -dφ/dz`; zero in the uniform pre-sheath.
    pub fn field_z(&self, z: f64) -> f64 {
        if z >= self.thickness {
            return 0.0;
        }
        let s = 1.0 - z.max(0.0) / self.thickness;
        -(4.0 / 3.0) * self.applied_voltage / self.thickness * s.cbrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> SheathModel {
        SheathModel::new(0.002, 300.0, 0.0).unwrap()
    }

    #[test]
    fn boundaries_and_midpoint() {
        let m = model();
        assert_eq!(m.sheath_potential(0.0).unwrap(), -300.0);
        assert_eq!(m.sheath_potential(0.002).unwrap(), 0.0);
        // -300 * 0.5^(4/3)
        let mid = m.sheath_potential(0.001).unwrap();
        assert!((mid - (-119.055)).abs() < 1e-2, "{mid}");
        assert!(m.sheath_potential(-1e-6).is_err());
        assert!(m.sheath_potential(0.0021).is_err());
    }

    #[test]
    fn presheath_is_uniform() {
        let m = model();
        assert_eq!(m.presheath_potential(0.01), 0.0);
        let m3 = SheathModel::new(0.002, 300.0, 3.0).unwrap();
        for z in [0.0021, 0.01, 0.09] {
            assert_eq!(m3.presheath_potential(z), 3.0);
        }
        let jump = m3.presheath_potential(0.002 + 1e-12) - m3.sheath_potential(0.002).unwrap();
        assert_eq!(jump.abs(), 3.0);
        assert!(SheathModel::new(0.002, 300.0, 100.0).is_err());
        assert!(SheathModel::new(0.0, 300.0, 0.0).is_err());
    }

    #[test]
    fn monotone_and_field_consistent() {
        let m = model();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=400 {
            let z = 0.002 * k as f64 / 400.0;
            let phi = m.sheath_potential(z).unwrap();
            assert!(phi >= prev);
            prev = phi;
        }
        // E_z matches a centred difference of φ
        for z in [1e-4, 5e-4, 1e-3, 1.5e-3] {
            let h = 1e-8;
            let fd = -(m.potential(z + h) - m.potential(z - h)) / (2.0 * h);
            assert!((fd - m.field_z(z)).abs() < 1e-5 * fd.abs());
        }
    }
}
