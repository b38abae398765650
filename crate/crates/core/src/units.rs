//! Physical constants (CODATA 2018, SI) and unit conversions.

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Electron mass, kg.
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Unified atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Vacuum permeability, H/m.
pub const MU_0: f64 = 1.256_637_062_12e-6;
/// Joules per electron-volt.
pub const EV: f64 = ELEMENTARY_CHARGE;
/// e²/(4πε₀) in eV·m, the Coulomb coupling used by the screened potentials.
pub const COULOMB_EV_M: f64 = ELEMENTARY_CHARGE / (4.0 * std::f64::consts::PI * EPSILON_0);

#[inline]
pub fn ev_to_joule(e: f64) -> f64 {
    e * EV
}

#[inline]
pub fn joule_to_ev(e: f64) -> f64 {
    e / EV
}

/// Speed of a particle of mass `mass` (kg) carrying kinetic energy `energy_ev`.
#[inline]
pub fn speed_from_ev(energy_ev: f64, mass: f64) -> f64 {
    (2.0 * ev_to_joule(energy_ev) / mass).sqrt()
}

/// Kinetic energy in eV of `mass` moving at `speed` (m/s).
#[inline]
pub fn ev_from_speed(speed: f64, mass: f64) -> f64 {
    joule_to_ev(0.5 * mass * speed * speed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coulomb_constant_is_14_4_ev_angstrom() {
        assert!((COULOMB_EV_M / 1e-10 - 14.399_645).abs() < 1e-5);
    }

    #[test]
    fn speed_energy_round_trip() {
        let v = speed_from_ev(10.0, ELECTRON_MASS);
        assert!((ev_from_speed(v, ELECTRON_MASS) - 10.0).abs() < 1e-12);
    }
}
