use std::f64::consts::{FRAC_PI_2, TAU};

use proptest::prelude::*;
use sputtersim::model::{EnergySampler, IonImpact, RngStream, Species, Table1D};
use sputtersim::sputter::{direction_from, emit_atoms, kappa, sample_emission_angles, EmissionModel};
use sputtersim::units::{ev_from_speed, AMU};
use sputtersim::Vec3;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const E_B: f64 = 3.49;

fn copper(yields: &[(f64, f64)]) -> EmissionModel {
    EmissionModel::new(Species::copper(), 39.948 * AMU, E_B, Table1D::new(yields.to_vec()).unwrap(), None).unwrap()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn emission_energy_never_exceeds_cutoff() {
    let m = copper(&[(0.0, 0.0), (1000.0, 2.0)]);
    let mut rng = RngStream::new(31, 0);
    for e_bom in [20.0, 300.0, 1000.0] {
        let cut = m.kappa * e_bom;
        let inverse = m.clone();
        for _ in 0..10_000_000 / 3 {
            let e = inverse.sample_energy(e_bom, &mut rng);
            assert!((0.0..=cut).contains(&e), "{e} > {cut}");
        }
        let thompson = m.clone().with_sampler(EnergySampler::Thompson);
        for _ in 0..20_000 {
            let e = thompson.sample_energy(e_bom, &mut rng);
            assert!((0.0..=cut * (1.0 + 1e-12)).contains(&e));
        }
    }
}

#[test]
fn energy_histogram_matches_density_bin_by_bin() {
    let m = copper(&[(0.0, 0.0), (1000.0, 2.0)]);
    let e_bom = 300.0;
    let cut = kappa(39.948 * AMU, Species::copper().mass) * e_bom;
    // oracle density 2a²E E_b/(E+E_b)³ on [0, κE], integrated per bin
    let a = (cut + E_B) / cut;
    let density = |e: f64| 2.0 * a * a * e * E_B / (e + E_B).powi(3);
    let norm = simpson(density, 0.0, cut, 20_000);
    assert!((norm - 1.0).abs() < 1e-9, "density normalisation {norm}");
    let bins = 20;
    let edge = |k: usize| cut * (k as f64 / bins as f64).powi(2);
    let n = 1_000_000usize;
    let mut rng = RngStream::new(32, 0);
    let mut counts = vec![0u64; bins];
    for _ in 0..n {
        let e = m.sample_energy(e_bom, &mut rng);
        let k = ((e / cut).sqrt() * bins as f64) as usize;
        counts[k.min(bins - 1)] += 1;
    }
    for (k, &c) in counts.iter().enumerate() {
        let p = simpson(density, edge(k), edge(k + 1), 2000);
        let mean = n as f64 * p;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((c as f64 - mean).abs() <= 3.0 * sd, "bin {k}: {c} vs {mean:.1} ± {sd:.1}");
    }
}

#[test]
fn azimuth_is_uniform() {
    let bins = 64;
    let n = 1_000_000;
    let mut counts = vec![0u64; bins];
    let mut rng = RngStream::new(33, 0);
    for _ in 0..n {
        let (_, phi) = sample_emission_angles(&mut rng);
        assert!((0.0..TAU).contains(&phi));
        counts[(phi / TAU * bins as f64) as usize] += 1;
    }
    let expected = n as f64 / bins as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(chi2);
    assert!(p > 1e-3, "chi2 {chi2}, p {p}");
}

#[test]
fn emitted_count_tracks_yield() {
    let m = copper(&[(0.0, 0.0), (100.0, 0.5), (500.0, 1.5)]);
    let impacts: Vec<IonImpact> = (0..2000)
        .map(|i| IonImpact { x: 0.001 * (i % 40) as f64, y: 0.0, z: 0.0, energy: 300.0, angle: 0.0, weight: 2.0 })
        .collect();
    let samples = 50;
    let atoms = emit_atoms(&m, &impacts, 0.0, 8, samples).unwrap();
    // yield 1.0 at 300 eV: exactly one atom per try
    assert_eq!(atoms.len(), impacts.len() * samples);
    let total: f64 = atoms.iter().map(|a| a.weight).sum();
    assert!((total / (2.0 * impacts.len() as f64) - 1.0).abs() < 1e-10, "{total}");

    let frac: Vec<IonImpact> = impacts.iter().map(|i| IonImpact { energy: 200.0, ..*i }).collect();
    let atoms = emit_atoms(&m, &frac, 0.0, 8, samples).unwrap();
    // yield 0.75: Bernoulli per try
    let n = (frac.len() * samples) as f64;
    let sd = (n * 0.75 * 0.25).sqrt();
    assert!((atoms.len() as f64 - 0.75 * n).abs() <= 3.0 * sd);
}

#[test]
fn impacts_off_the_target_plane_are_refused() {
    let m = copper(&[(0.0, 1.0), (1000.0, 1.0)]);
    let bad = [IonImpact { x: 0.0, y: 0.0, z: 0.01, energy: 300.0, angle: 0.0, weight: 1.0 }];
    assert!(emit_atoms(&m, &bad, 0.0, 1, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn atoms_start_where_ions_land(
        pts in proptest::collection::vec((-0.05..0.05f64, -0.05..0.05f64, 50.0..800.0f64), 1..40),
        seed in any::<u64>(),
    ) {
        let m = copper(&[(0.0, 0.0), (1000.0, 3.0)]);
        let impacts: Vec<IonImpact> =
            pts.iter().map(|&(x, y, energy)| IonImpact { x, y, z: 0.0, energy, angle: 0.0, weight: 1.0 }).collect();
        let atoms = emit_atoms(&m, &impacts, 0.0, seed, 3).unwrap();
        for a in &atoms {
            prop_assert!(impacts.iter().any(|i| i.x == a.x && i.y == a.y && i.z == a.z));
            prop_assert!(a.vz >= 0.0);
            let e = ev_from_speed(a.velocity().norm(), m.target.mass);
            prop_assert!(e <= m.kappa * 800.0 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn emission_direction_sits_at_theta_from_normal(
        nx in -1.0..1.0f64, ny in -1.0..1.0f64, nz in 0.1..1.0f64,
        theta in 0.0..FRAC_PI_2, phi in 0.0..TAU,
    ) {
        let n = Vec3::new(nx, ny, nz).normalize();
        let d = direction_from(&n, theta, phi);
        prop_assert!((d.norm() - 1.0).abs() < 1e-12);
        prop_assert!((d.dot(&n).clamp(-1.0, 1.0).acos() - theta).abs() < 1e-7);
    }

    #[test]
    fn yield_interpolates_linearly(e in 0.0..1000.0f64) {
        let m = copper(&[(0.0, 0.0), (200.0, 1.0), (1000.0, 2.6)]);
        let oracle = if e <= 200.0 { e / 200.0 } else { 1.0 + 1.6 * (e - 200.0) / 800.0 };
        prop_assert!((m.yield_lookup(e, 0.0) - oracle).abs() < 1e-12);
    }
}
