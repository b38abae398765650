use proptest::prelude::*;
use sputtersim::fields::Theta;
use sputtersim::model::{CollisionProcess, CrossSectionTable, GasState, Particle, RngStream, Species, SpeciesId};
use sputtersim::plasma::{
    mcc_collide, push_in_place, secondaries_for_ion, CollisionSet, EventKind, IonizationProducts, PushFields, PushSettings,
    ScatteringModel,
};
use sputtersim::stats::ks_test;
use sputtersim::units::{speed_from_ev, AMU, ELECTRON_MASS, ELEMENTARY_CHARGE};
use sputtersim::Vec3;

const THRESH_EXC: f64 = 11.55;
const THRESH_IZ: f64 = 15.76;

fn flat(process: CollisionProcess, threshold: f64, sigma: f64) -> CrossSectionTable {
    let pts = if process.is_inelastic() {
        vec![(0.0, 0.0), (threshold, 0.0), (threshold + 1e-6, sigma), (1000.0, sigma)]
    } else {
        vec![(0.0, sigma), (1000.0, sigma)]
    };
    CrossSectionTable::new(process, "e", "Ar", pts, process.is_inelastic().then_some(threshold)).unwrap()
}

fn electron_set(max_probability: f64) -> CollisionSet {
    let tables = vec![
        flat(CollisionProcess::Elastic, 0.0, 1.0e-19),
        flat(CollisionProcess::Excitation, THRESH_EXC, 2.0e-20),
        flat(CollisionProcess::Ionization, THRESH_IZ, 3.0e-20),
    ];
    CollisionSet::new(Species::electron(), Species::argon(), tables)
        .unwrap()
        .with_max_probability(max_probability)
        .with_products(IonizationProducts {
            electron: SpeciesId(0),
            electron_mass: ELECTRON_MASS,
            ion: SpeciesId(1),
            ion_mass: 39.948 * AMU,
        })
}

fn electron(energy: f64, dir: Vec3) -> Particle {
    let v = speed_from_ev(energy, ELECTRON_MASS);
    Particle::new(SpeciesId(0), Vec3::new(0.0, 0.0, 0.05), dir.normalize() * v, 1.0).unwrap()
}

#[test]
fn channels_are_chosen_by_partial_cross_section() {
    let set = electron_set(100.0);
    let gas = GasState::uniform_argon(10.0, 300.0).unwrap();
    let mut rng = RngStream::new(21, 0);
    // ν Δt ≈ 30: every test ends in a real collision
    let dt = 2e-8;
    let n = 1_000_000;
    let mut counts = [0u64; 3];
    let mut nulls = 0u64;
    for _ in 0..n {
        let mut p = electron(50.0, Vec3::x());
        match mcc_collide(&mut p, &set, &gas, dt, &mut rng).unwrap().kind {
            EventKind::Elastic => counts[0] += 1,
            EventKind::Excitation => counts[1] += 1,
            EventKind::Ionization => counts[2] += 1,
            EventKind::Null => nulls += 1,
            other => panic!("unexpected {other:?}"),
        }
    }
    let real: u64 = counts.iter().sum();
    assert_eq!(nulls, 0);
    let partial = [1.0e-19, 2.0e-20, 3.0e-20];
    let total: f64 = partial.iter().sum();
    for (c, s) in counts.iter().zip(partial) {
        let p = s / total;
        let mean = real as f64 * p;
        let sd = (real as f64 * p * (1.0 - p)).sqrt();
        assert!((*c as f64 - mean).abs() <= 3.0 * sd, "count {c}, expected {mean} ± {sd}");
    }
}

#[test]
fn collision_probability_follows_exponential_law() {
    let set = electron_set(1.0);
    let gas = GasState::uniform_argon(1.0, 300.0).unwrap();
    let mut rng = RngStream::new(22, 0);
    let n_gas = gas.max_density();
    let v = speed_from_ev(50.0, ELECTRON_MASS);
    let dt = 0.5 / (n_gas * 1.5e-19 * v);
    let n = 1_000_000;
    let mut hits = 0u64;
    for _ in 0..n {
        let mut p = electron(50.0, Vec3::y());
        if mcc_collide(&mut p, &set, &gas, dt, &mut rng).unwrap().kind != EventKind::Null {
            hits += 1;
        }
    }
    let p = 1.0 - (-0.5f64).exp();
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    assert!((hits as f64 - n as f64 * p).abs() <= 3.0 * sd, "{hits} vs {}", n as f64 * p);
}

#[test]
fn charged_targets_and_neutral_projectiles_are_refused() {
    let t = flat(CollisionProcess::Elastic, 0.0, 1e-19);
    assert!(CollisionSet::new(Species::electron(), Species::argon_ion(), vec![t.clone()]).is_err());
    assert!(CollisionSet::new(Species::electron(), Species::electron(), vec![t.clone()]).is_err());
    assert!(CollisionSet::new(Species::argon(), Species::argon(), vec![t]).is_err());
    // ions have no ionization channel
    let iz = CrossSectionTable::new(
        CollisionProcess::Ionization,
        "Ar+",
        "Ar",
        vec![(0.0, 0.0), (15.76, 0.0), (100.0, 1e-20)],
        Some(15.76),
    )
    .unwrap();
    assert!(CollisionSet::new(Species::argon_ion(), Species::argon(), vec![iz]).is_err());
}

#[test]
fn isotropic_scattering_is_uniform_in_cosine() {
    let mut rng = RngStream::new(23, 0);
    let samples: Vec<f64> = (0..100_000).map(|_| ScatteringModel::Isotropic.sample_cos(10.0, &mut rng)).collect();
    let ks = ks_test(&samples, |c| ((c + 1.0) / 2.0).clamp(0.0, 1.0));
    assert!(ks.p_value > 1e-3, "{ks:?}");
}

#[test]
fn secondary_count_has_mean_gamma() {
    let mut rng = RngStream::new(24, 0);
    let gamma = 1.37;
    let n = 200_000;
    let total: u64 = (0..n).map(|_| secondaries_for_ion(gamma, &mut rng) as u64).sum();
    // count = 1 + Bernoulli(0.37)
    let f = gamma - 1.0;
    let sd = (n as f64 * f * (1.0 - f)).sqrt();
    assert!((total as f64 - n as f64 * gamma).abs() <= 3.0 * sd);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ionization_conserves_energy(energy in 16.0..500.0f64, seed in any::<u64>(), dx in -1.0..1.0f64, dy in -1.0..1.0f64) {
        let set = electron_set(100.0);
        let gas = GasState::uniform_argon(10.0, 300.0).unwrap();
        let mut rng = RngStream::new(seed, 0);
        let mut seen = 0;
        for _ in 0..200 {
            let mut p = electron(energy, Vec3::new(dx, dy, 0.3));
            let ev = mcc_collide(&mut p, &set, &gas, 2e-8, &mut rng).unwrap();
            let residual = ev.energy_before - ev.energy_after - ev.secondary_energy - ev.energy_transfer;
            prop_assert!(residual.abs() <= 8.0 * f64::EPSILON * ev.energy_before, "{:?}: {}", ev.kind, residual);
            let k_after = 0.5 * ELECTRON_MASS * p.velocity.norm_squared() / ELEMENTARY_CHARGE;
            prop_assert!((k_after - ev.energy_after).abs() <= 1e-9 * energy);
            if ev.kind == EventKind::Ionization {
                seen += 1;
                prop_assert_eq!(ev.spawned.len(), 2);
                prop_assert!((ev.energy_transfer - THRESH_IZ).abs() < 1e-12);
                let k_sec = 0.5 * ELECTRON_MASS * ev.spawned[0].velocity.norm_squared() / ELEMENTARY_CHARGE;
                prop_assert!((k_sec - ev.secondary_energy).abs() <= 1e-9 * energy);
            } else {
                prop_assert!(ev.spawned.is_empty());
            }
        }
        prop_assert!(seen > 0);
    }

    #[test]
    fn magnetic_push_conserves_speed(
        bx in -0.1..0.1f64, by in -0.1..0.1f64, bz in 0.005..0.1f64,
        vx in -1.0..1.0f64, vy in -1.0..1.0f64, vz in -1.0..1.0f64,
        energy in 0.1..500.0f64,
        rotation in 0.001..0.3f64,
        theta in 0.5..1.0f64,
    ) {
        let b = Vec3::new(bx, by, bz);
        let q_m = -ELEMENTARY_CHARGE / ELECTRON_MASS;
        let dt = 0.999 * rotation / (q_m.abs() * b.norm());
        let settings = PushSettings::new(dt, Theta::new(theta).unwrap());
        let dir = Vec3::new(vx, vy, vz + 1e-3);
        let mut p = electron(energy, dir);
        let fields = PushFields::steady(Vec3::zeros(), b);
        for _ in 0..1000 {
            let k0 = p.velocity.norm_squared();
            push_in_place(&mut p, q_m, &fields, &settings).unwrap();
            let k1 = p.velocity.norm_squared();
            prop_assert!((k1 - k0).abs() <= 1e-10 * k0);
        }
    }
}

#[test]
fn push_refuses_unresolved_gyration() {
    let b = Vec3::new(0.0, 0.0, 0.05);
    let q_m = -ELEMENTARY_CHARGE / ELECTRON_MASS;
    let settings = PushSettings::new(0.31 / (q_m.abs() * b.norm()), Theta::new(0.5).unwrap());
    let mut p = electron(10.0, Vec3::x());
    assert!(push_in_place(&mut p, q_m, &PushFields::steady(Vec3::zeros(), b), &settings).is_err());
}
