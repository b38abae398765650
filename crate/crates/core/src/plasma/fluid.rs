//! Drift-diffusion plasma backend: electron and ion densities on the r–z
//! mesh advanced by the continuity equation with drift-diffusion fluxes,
//! Maxwellian-averaged collision and ionization rates, and either the
//! analytic sheath or a Poisson solve for the field.
//!
//! The update is explicit and the step is capped by the diffusion and
//! drift stability limits, which for electrons are severe. The backend is
//! meant for quick profile estimates of the ion flux onto the target.

use std::f64::consts::{PI, TAU};

use super::continuity::{continuity_step, DensityBoundary};
use super::kinetic::{DiagnosticRow, PlasmaOutput, PlasmaSetup};
use super::{drift_diffusion_flux, CollisionSet, PlasmaError, Polarity, TransportCoeffs};
use crate::fields::{poisson_solve, CathodeBoundary, FieldMap, Grid, PoissonSettings};
use crate::model::{derive_seed, CollisionProcess, CrossSectionTable, FieldModel, IonImpact, RngStream, SimConfig};
use crate::units::{BOLTZMANN, EV};
use crate::Vec3;

/// Maxwellian rate coefficient `⟨σv⟩` (m³/s) of `sigma(E [eV])` for a
/// particle of mass `mass` at temperature `kt_ev` (eV):
/// `√(8kT/πm) ∫₀^∞ σ(x kT) x e^{-x} dx`.
pub fn maxwellian_rate(sigma: impl Fn(f64) -> f64, mass: f64, kt_ev: f64, threshold_ev: f64) -> f64 {
    let x0 = threshold_ev / kt_ev;
    let x1 = x0.max(0.0) + 60.0;
    let vbar = (8.0 * kt_ev * EV / (PI * mass)).sqrt();
    // composite Simpson; the tables are only piecewise linear so a fixed
    // fine rule is steadier than an adaptive one across their kinks
    let n = 20_000;
    let h = (x1 - x0) / n as f64;
    // energies measured from the threshold so the first node sits exactly on it
    let f = |x: f64| sigma(threshold_ev + (x - x0) * kt_ev) * x * (-x).exp();
    let mut s = f(x0) + f(x1);
    for k in 1..n {
        s += f(x0 + h * k as f64) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    vbar * s * h / 3.0
}

fn table_of(set: &CollisionSet, process: CollisionProcess) -> Option<&CrossSectionTable> {
    set.tables().iter().find(|t| t.process == process)
}

/// `(∂n/∂r, ∂n/∂z)` by central differences, one-sided at the edges.
fn gradient(grid: &Grid, n: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (nr, nz) = (grid.nr(), grid.nz());
    let mut gr = vec![0.0; grid.len()];
    let mut gz = vec![0.0; grid.len()];
    for j in 0..nz {
        for i in 0..nr {
            let k = grid.index(i, j);
            let (a, b) = (i.saturating_sub(1), (i + 1).min(nr - 1));
            gr[k] = if i == 0 { 0.0 } else { (n[grid.index(b, j)] - n[grid.index(a, j)]) / (grid.r[b] - grid.r[a]) };
            let (a, b) = (j.saturating_sub(1), (j + 1).min(nz - 1));
            gz[k] = (n[grid.index(i, b)] - n[grid.index(i, a)]) / (grid.z[b] - grid.z[a]);
        }
    }
    (gr, gz)
}

struct Species1 {
    charge: f64,
    coeffs: Vec<TransportCoeffs>,
}

impl Species1 {
    fn fluxes(&self, grid: &Grid, field: &FieldMap, n: &[f64], er: &[f64], ez: &[f64]) -> Result<(Vec<f64>, Vec<f64>), PlasmaError> {
        let (gr, gz) = gradient(grid, n);
        let mut jr = vec![0.0; grid.len()];
        let mut jz = vec![0.0; grid.len()];
        for k in 0..grid.len() {
            // local frame (r̂, θ̂, ẑ)
            let b = Vec3::new(field.br[k], 0.0, field.bz[k]);
            let h = if b.norm() > 0.0 { b.normalize() } else { Vec3::z() };
            let j = drift_diffusion_flux(
                n[k],
                &Vec3::new(gr[k], 0.0, gz[k]),
                &Vec3::new(er[k], 0.0, ez[k]),
                &h,
                &self.coeffs[k],
                Polarity::of(self.charge),
            )?;
            jr[k] = if grid.r[k % grid.nr()] == 0.0 { 0.0 } else { j.x };
            jz[k] = j.z;
        }
        Ok((jr, jz))
    }

    /// Largest stable explicit step on `grid` for fields up to `e_max`.
    fn stable_dt(&self, grid: &Grid, e_max: f64) -> f64 {
        let h = grid.r.windows(2).chain(grid.z.windows(2)).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let d = self.coeffs.iter().map(|c| c.d_par.max(c.d_perp) + c.d_drift.unwrap_or(0.0)).fold(0.0, f64::max);
        let mu = self.coeffs.iter().map(|c| c.mu_par.max(c.mu_perp) + c.mu_drift.unwrap_or(0.0)).fold(0.0, f64::max);
        let diff = if d > 0.0 { 0.2 * h * h / d } else { f64::INFINITY };
        let drift = if mu * e_max > 0.0 { 0.4 * h / (mu * e_max) } else { f64::INFINITY };
        diff.min(drift)
    }
}

/// Runs the drift-diffusion backend for `cfg.plasma.steps` steps and turns
/// the time-integrated ion flux onto the target into `macro_particles`
/// impact records at the full cathode fall energy.
pub fn run_fluid(cfg: &SimConfig, setup: &PlasmaSetup, seed: u64) -> Result<PlasmaOutput, PlasmaError> {
    let p = &cfg.plasma;
    let d = &cfg.discharge;
    let c = &cfg.chamber;
    if !(p.electron_temperature > 0.0) {
        return Err(PlasmaError::Stage("fluid backend needs a positive plasma.electron_temperature".into()));
    }
    let (eset, iset) = match (&setup.electron_set, &setup.ion_set) {
        (Some(e), Some(i)) => (e, i),
        _ => return Err(PlasmaError::Stage("fluid backend needs electron and ion cross sections".into())),
    };
    let grid = setup.field.grid.clone();
    let te = p.electron_temperature;
    let t_gas = setup.gas.temperature.min();
    let kti = BOLTZMANN * t_gas / EV;
    let k_momentum_e = maxwellian_rate(|e| eset.total_sigma(e), setup.electron.mass, te, 0.0);
    let k_iz = table_of(eset, CollisionProcess::Ionization)
        .map_or(0.0, |t| maxwellian_rate(|e| t.sigma(e), setup.electron.mass, te, t.threshold_ev));
    let k_momentum_i = maxwellian_rate(|e| iset.total_sigma(e), setup.ion.mass, kti, 0.0);

    let n_gas: Vec<f64> = (0..grid.len())
        .map(|k| setup.gas.density_at(&Vec3::new(grid.r[k % grid.nr()], 0.0, grid.z[k / grid.nr()])))
        .collect();
    let bmag: Vec<f64> = setup.field.br.iter().zip(&setup.field.bz).map(|(a, b)| a.hypot(*b)).collect();
    let build = |charge: f64, mass: f64, m_eff: f64, rate: f64, temp_k: f64| -> Result<Species1, PlasmaError> {
        let coeffs = (0..grid.len())
            .map(|k| TransportCoeffs::new(charge, mass, m_eff * mass, n_gas[k] * rate, bmag[k], temp_k))
            .collect::<Result<_, _>>()?;
        Ok(Species1 { charge, coeffs })
    };
    let electrons = build(setup.electron.charge, setup.electron.mass, p.electron_effective_mass, k_momentum_e, te * EV / BOLTZMANN)?;
    let ions = build(setup.ion.charge, setup.ion.mass, p.ion_effective_mass, k_momentum_i, t_gas)?;

    let pic = p.field_model == FieldModel::Pic;
    let cathode = CathodeBoundary { radius: c.target_radius };
    let poisson = PoissonSettings { tolerance: p.poisson_tolerance, max_iterations: p.poisson_max_iterations, omega: None };
    let (mut er, mut ez) = (vec![0.0; grid.len()], vec![0.0; grid.len()]);
    if let Some(sh) = &setup.sheath {
        for k in 0..grid.len() {
            ez[k] = sh.field_z(grid.z[k / grid.nr()] - c.target_z);
        }
    }
    let e_scale = if pic || setup.sheath.is_none() {
        2.0 * d.applied_voltage / (c.height.min(c.radius) * 0.05)
    } else {
        ez.iter().fold(0.0f64, |m, e| m.max(e.abs()))
    };
    let dt = p.dt.min(electrons.stable_dt(&grid, e_scale)).min(ions.stable_dt(&grid, e_scale));
    if dt < p.dt {
        log::info!("fluid backend: time step reduced to {dt:.3e} s for stability");
    }

    let (nr, nz) = (grid.nr(), grid.nz());
    let mut ne: Vec<f64> = (0..grid.len())
        .map(|k| if grid.z[k / nr] - c.target_z <= p.seed_region_height { p.electron_density } else { 0.0 })
        .collect();
    let mut ni = ne.clone();
    let gamma = d.secondary_yield.unwrap_or(0.0);
    let vol = grid.node_volumes();
    // ions delivered to each target ring over the run
    let mut ring_ions = vec![0.0; nr];
    let mut out = PlasmaOutput::default();
    let mut phi_prev: Option<Vec<f64>> = None;

    for step in 1..=p.steps {
        let mut iterations = 0;
        if pic {
            let (phi, report) = poisson_solve(&grid, &ni, &ne, d.applied_voltage, cathode, phi_prev.as_deref(), &poisson)?;
            iterations = report.iterations;
            let (gr, gz) = grid.negative_gradient(&phi);
            er = gr;
            ez = gz;
            phi_prev = Some(phi);
        }
        let (jer, jez) = electrons.fluxes(&grid, &setup.field, &ne, &er, &ez)?;
        let (jir, jiz) = ions.fluxes(&grid, &setup.field, &ni, &er, &ez)?;
        let mut src: Vec<f64> = (0..grid.len()).map(|k| k_iz * n_gas[k] * ne[k]).collect();
        let src_i = src.clone();
        for i in 0..nr {
            let k = grid.index(i, 0);
            let flux_in = (-jiz[k]).max(0.0);
            let (r0, r1) = grid.r_faces(i);
            if grid.r[i] <= c.target_radius * (1.0 + 1e-12) {
                ring_ions[i] += flux_in * PI * (r1 * r1 - r0 * r0) * dt;
            }
            // secondaries enter the cathode-row control volume
            src[k] += gamma * flux_in * PI * (r1 * r1 - r0 * r0) / vol[k];
        }
        ne = continuity_step(&grid, &ne, &jer, &jez, &src, dt, DensityBoundary::ELECTRONS)?.density;
        ni = continuity_step(&grid, &ni, &jir, &jiz, &src_i, dt, DensityBoundary::IONS)?.density;
        let total = |n: &[f64]| n.iter().zip(&vol).map(|(a, v)| a * v).sum::<f64>();
        out.diagnostics.push(DiagnosticRow {
            step,
            time: step as f64 * dt,
            electrons: total(&ne).round() as usize,
            ions: total(&ni).round() as usize,
            mean_electron_energy: 1.5 * te,
            mean_ion_energy: 1.5 * kti,
            max_abs_phi: phi_prev.as_ref().map_or(d.applied_voltage, |f| f.iter().fold(0.0, |m, x| m.max(x.abs()))),
            iterations,
        });
    }
    out.ionizations = (k_iz > 0.0) as u64;
    let _ = nz;
    out.impacts = impacts_from_rings(&grid, &ring_ions, p.macro_particles, d.applied_voltage + d.presheath_drop, c, seed);
    Ok(out)
}

/// Splits the ring totals into `count` equal-weight impacts by largest
/// remainder and places each uniformly on its annulus.
fn impacts_from_rings(
    grid: &Grid,
    ring_ions: &[f64],
    count: usize,
    energy: f64,
    c: &crate::model::Chamber,
    seed: u64,
) -> Vec<IonImpact> {
    let total: f64 = ring_ions.iter().sum();
    if !(total > 0.0) || count == 0 {
        return Vec::new();
    }
    let ideal: Vec<f64> = ring_ions.iter().map(|w| w / total * count as f64).collect();
    let mut n: Vec<usize> = ideal.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..ring_ions.len()).collect();
    order.sort_by(|&a, &b| (ideal[b] - ideal[b].floor()).total_cmp(&(ideal[a] - ideal[a].floor())).then(a.cmp(&b)));
    let missing = count - n.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        n[i] += 1;
    }
    let weight = total / count as f64;
    let mut rng = RngStream::new(derive_seed(seed, "plasma-fluid"), 0);
    let mut out = Vec::with_capacity(count);
    for (i, &k) in n.iter().enumerate() {
        let (r0, r1) = grid.r_faces(i);
        let r1 = r1.min(c.target_radius);
        for _ in 0..k {
            let r = (r0 * r0 + (r1 * r1 - r0 * r0) * rng.uniform()).sqrt();
            let phi = TAU * rng.uniform();
            out.push(IonImpact { x: r * phi.cos(), y: r * phi.sin(), z: c.target_z, energy, angle: 0.0, weight });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_cross_section_rate_is_sigma_vbar() {
        let m = 9.109e-31;
        let k = maxwellian_rate(|_| 1e-19, m, 3.0, 0.0);
        let vbar = (8.0 * 3.0 * EV / (PI * m)).sqrt();
        assert!((k / (1e-19 * vbar) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn step_threshold_rate() {
        // σ = σ0 above E_t: k = σ0 vbar (1 + x_t) e^{-x_t}
        let m = 9.109e-31;
        let k = maxwellian_rate(|e| if e >= 15.76 { 3e-20 } else { 0.0 }, m, 3.0, 15.76);
        let x = 15.76 / 3.0;
        let vbar = (8.0 * 3.0 * EV / (PI * m)).sqrt();
        assert!((k / (3e-20 * vbar * (1.0 + x) * (-x as f64).exp()) - 1.0).abs() < 1e-8);
    }
}
