use sputtersim_web::{deflection_curve, deposition_profile, gyro_orbit, gyro_radius};

/// radial cells of the default substrate mesh
const RADIAL_BANDS: usize = 20;

#[test]
fn orbit_closes_on_the_larmor_circle() {
    let (b, e) = (0.02, 10.0);
    let pts = gyro_orbit(b, e, 200, 3, 0.5).unwrap();
    assert_eq!(pts.len(), 2 * (600 + 1));
    let xs: Vec<f64> = pts.iter().step_by(2).copied().collect();
    let ys: Vec<f64> = pts.iter().skip(1).step_by(2).copied().collect();
    // the diameter of the orbit along y, since it starts moving along +x
    let span = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let r = gyro_radius(b, e);
    assert!((span / 2.0 - r).abs() < 1e-3 * r, "{} vs {r}", span / 2.0);
    let xmax = xs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    assert!(xmax <= 1.01 * r, "{xmax} vs {r}");
    assert!(gyro_orbit(-1.0, e, 10, 1, 0.5).is_err());
}

#[test]
fn deflection_curves_for_every_potential() {
    for name in ["hard-sphere", "born-mayer", "lennard-jones", "universal"] {
        let c = deflection_curve(name, 20.0, 64).unwrap();
        assert_eq!(c.len(), 128);
        assert!(c.chunks(2).all(|p| p[0] > 0.0 && p[1].is_finite() && p[1] <= std::f64::consts::PI));
        assert!(c[1] > 0.5, "{name}: head-on-ish collisions deflect strongly, got {}", c[1]);
    }
    assert!(deflection_curve("morse", 20.0, 8).is_err());
}

#[test]
fn gas_scattering_flattens_the_film_profile() {
    let vac = deposition_profile(0.0, 20_000, 1).unwrap();
    let gas = deposition_profile(3.0, 20_000, 1).unwrap();
    assert_eq!(vac.len(), 2 * RADIAL_BANDS);
    for p in [&vac, &gas] {
        let peak = p.iter().skip(1).step_by(2).cloned().fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 1e-12);
    }
    // edge-to-peak ratio rises as collisions randomise the directions
    let edge = |p: &[f64]| p[p.len() - 1];
    assert!(edge(&gas) > edge(&vac), "{} vs {}", edge(&gas), edge(&vac));
}
