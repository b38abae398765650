//! Classical two-body deflection angle in the centre-of-mass frame,
//! `χ = π − 2ρ ∫_{r_min}^∞ dr / (r² √F(r))` with
//! `F(r) = 1 − V(r)/E − ρ²/r²`.
//!
//! With `u = r_min/r = 1 − t²` the integral becomes
//! `(2/r_min) ∫₀¹ t dt / √F(r_min/(1 − t²))`, whose integrand stays finite
//! at the turning point.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{PotentialModel, TransportError};

const SCAN_FACTOR: f64 = 0.99;
/// below this `t` the integrand is taken as constant
const HEAD: f64 = 1e-4;
const QUAD_TOLERANCE: f64 = 1e-11;
/// quadrature error estimates above this are reported as failures
const QUAD_FAILURE: f64 = 1e-6;

#[inline]
fn reduced(model: &PotentialModel, e_cm: f64, rho: f64, r: f64) -> f64 {
    let q = rho / r;
    1.0 - model.eval(r) / e_cm - q * q
}

/// Outermost turning point: largest root of `F(r) = 0`. Returns 0 for a
/// head-on pass with no turning point.
pub fn rmin_solve(model: &PotentialModel, e_cm: f64, rho: f64) -> Result<f64, TransportError> {
    if !(e_cm > 0.0 && e_cm.is_finite()) {
        return Err(TransportError::Deflection(format!("centre-of-mass energy must be positive, got {e_cm}")));
    }
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(TransportError::Deflection(format!("impact parameter must be non-negative, got {rho}")));
    }
    let f = |r: f64| reduced(model, e_cm, rho, r);
    let scale = model.length_scale();
    let mut hi = 10.0 * scale.max(rho);
    let mut grow = 0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err(TransportError::Deflection(format!("no classically allowed region for E = {e_cm} eV, rho = {rho} m")));
        }
    }
    let floor = 1e-4 * if rho > 0.0 { scale.min(rho) } else { scale };
    let mut lo = hi * SCAN_FACTOR;
    while f(lo) > 0.0 {
        hi = lo;
        lo *= SCAN_FACTOR;
        if lo < floor {
            if rho == 0.0 {
                return Ok(0.0);
            }
            return Err(TransportError::Deflection(format!("turning point not bracketed for E = {e_cm} eV, rho = {rho} m")));
        }
    }
    // bisect down to adjacent floats, keeping F(hi) > 0
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Deflection angle and the quadrature's error estimate.
pub fn deflection_with_error(model: &PotentialModel, e_cm: f64, rho: f64) -> Result<(f64, f64), TransportError> {
    let rm = rmin_solve(model, e_cm, rho)?;
    if rho == 0.0 {
        return Ok((if rm > 0.0 { PI } else { 0.0 }, 0.0));
    }
    let f = |r: f64| reduced(model, e_cm, rho, r);
    let g = |t: f64| {
        let u = 1.0 - t * t;
        if u <= 0.0 {
            return t;
        }
        t / f(rm / u).max(f64::MIN_POSITIVE).sqrt()
    };
    // a jump in V at the turning point leaves F(r_min⁺) > 0 and no singularity
    let smooth_root = f(rm) < 1e-6;
    let start = if smooth_root { HEAD } else { 0.0 };
    let mut cuts: Vec<f64> = model
        .discontinuities()
        .into_iter()
        .filter(|&rd| rd > rm * (1.0 + 1e-12))
        .map(|rd| (1.0 - rm / rd).sqrt())
        .filter(|&t| t > start && t < 1.0)
        .collect();
    cuts.sort_by(f64::total_cmp);
    let mut nodes = vec![start];
    nodes.extend(cuts);
    nodes.push(1.0);
    let mut integral = if smooth_root { HEAD * g(HEAD) } else { 0.0 };
    let mut error = 0.0;
    for w in nodes.windows(2) {
        let (i, e) = integrate_adaptive(&g, w[0], w[1], 0);
        integral += i;
        error += e;
    }
    let prefactor = 4.0 * rho / rm;
    Ok((PI - prefactor * integral, prefactor * error))
}

const MAX_SPLITS: u32 = 24;

/// Double-exponential quadrature, bisecting where the error estimate is
/// poor. Near orbiting the integrand has a tall narrow peak where `F`
/// almost touches zero, which a single rule cannot resolve.
fn integrate_adaptive(g: &impl Fn(f64) -> f64, a: f64, b: f64, depth: u32) -> (f64, f64) {
    let out = quadrature::double_exponential::integrate(g, a, b, QUAD_TOLERANCE);
    if out.error_estimate <= QUAD_TOLERANCE * out.integral.abs().max(1e-3) || depth >= MAX_SPLITS {
        return (out.integral, out.error_estimate);
    }
    let m = 0.5 * (a + b);
    let (i1, e1) = integrate_adaptive(g, a, m, depth + 1);
    let (i2, e2) = integrate_adaptive(g, m, b, depth + 1);
    (i1 + i2, e1 + e2)
}

/// Centre-of-mass deflection `χ` (rad) at energy `e_cm` (eV) and impact
/// parameter `rho` (m).
pub fn scattering_angle(model: &PotentialModel, e_cm: f64, rho: f64) -> Result<f64, TransportError> {
    let (chi, err) = deflection_with_error(model, e_cm, rho)?;
    if !(err <= QUAD_FAILURE) || !chi.is_finite() {
        return Err(TransportError::Deflection(format!(
            "quadrature did not converge at E = {e_cm} eV, rho = {rho} m (error estimate {err})"
        )));
    }
    Ok(chi)
}

/// Interaction cutoff: the outermost radius with `|V| ≥ 10⁻³ E`, capped at
/// three length scales. Zero when the potential never reaches the threshold.
pub fn rho_max(model: &PotentialModel, e_cm: f64) -> f64 {
    let threshold = 1e-3 * e_cm;
    let cap = 3.0 * model.length_scale();
    let strong = |r: f64| model.eval(r).abs() >= threshold;
    if strong(cap) {
        return cap;
    }
    let floor = 1e-4 * model.length_scale();
    let mut hi = cap;
    let mut lo = cap * SCAN_FACTOR;
    while !strong(lo) {
        hi = lo;
        lo *= SCAN_FACTOR;
        if lo < floor {
            return 0.0;
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if strong(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `χ` tabulated on a grid of `ln E` and `ρ/ρ_max(E)`, with `ρ_max` per
/// energy; bilinear interpolation between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DeflectionTable {
    ln_e_min: f64,
    ln_e_step: f64,
    n_energy: usize,
    n_rho: usize,
    rho_max: Vec<f64>,
    /// row-major, energy slowest
    chi: Vec<f64>,
    /// worst quadrature error estimate seen while filling the table
    pub max_error: f64,
}

impl DeflectionTable {
    pub fn build(model: &PotentialModel, e_min: f64, e_max: f64, n_energy: usize, n_rho: usize) -> Result<Self, TransportError> {
        if !(e_min > 0.0 && e_max > e_min) || n_energy < 2 || n_rho < 2 {
            return Err(TransportError::Deflection("deflection table needs 0 < e_min < e_max and at least 2x2 nodes".into()));
        }
        let ln_e_min = e_min.ln();
        let ln_e_step = (e_max.ln() - ln_e_min) / (n_energy - 1) as f64;
        let rows: Vec<Result<(f64, Vec<f64>, f64), TransportError>> = (0..n_energy)
            .into_par_iter()
            .map(|i| {
                let e = (ln_e_min + ln_e_step * i as f64).exp();
                let rmax = rho_max(model, e);
                let mut worst = 0.0f64;
                let mut row = Vec::with_capacity(n_rho);
                for j in 0..n_rho {
                    let rho = rmax * j as f64 / (n_rho - 1) as f64;
                    let (chi, err) = if rmax == 0.0 { (0.0, 0.0) } else { deflection_with_error(model, e, rho)? };
                    worst = worst.max(err);
                    row.push(chi);
                }
                Ok((rmax, row, worst))
            })
            .collect();
        let mut table = DeflectionTable {
            ln_e_min,
            ln_e_step,
            n_energy,
            n_rho,
            rho_max: Vec::with_capacity(n_energy),
            chi: Vec::with_capacity(n_energy * n_rho),
            max_error: 0.0,
        };
        for r in rows {
            let (rmax, row, worst) = r?;
            table.rho_max.push(rmax);
            table.chi.extend(row);
            table.max_error = table.max_error.max(worst);
        }
        if table.max_error > QUAD_FAILURE {
            log::warn!("deflection table: largest quadrature error estimate {:.3e} rad", table.max_error);
        }
        Ok(table)
    }

    #[inline]
    fn energy_index(&self, e_cm: f64) -> (usize, f64) {
        let x = ((e_cm.max(f64::MIN_POSITIVE).ln() - self.ln_e_min) / self.ln_e_step).clamp(0.0, (self.n_energy - 1) as f64);
        let i = (x as usize).min(self.n_energy - 2);
        (i, x - i as f64)
    }

    /// Cutoff radius at `e_cm`, interpolated in `ln E`.
    pub fn rho_max(&self, e_cm: f64) -> f64 {
        let (i, w) = self.energy_index(e_cm);
        self.rho_max[i] * (1.0 - w) + self.rho_max[i + 1] * w
    }

    pub fn cross_section(&self, e_cm: f64) -> f64 {
        let r = self.rho_max(e_cm);
        PI * r * r
    }

    /// `χ` at `e_cm` and reduced impact parameter `b = ρ/ρ_max ∈ [0, 1]`.
    pub fn chi(&self, e_cm: f64, b: f64) -> f64 {
        let (i, w) = self.energy_index(e_cm);
        let y = b.clamp(0.0, 1.0) * (self.n_rho - 1) as f64;
        let j = (y as usize).min(self.n_rho - 2);
        let v = y - j as f64;
        let at = |ii: usize, jj: usize| self.chi[ii * self.n_rho + jj];
        (1.0 - w) * ((1.0 - v) * at(i, j) + v * at(i, j + 1)) + w * ((1.0 - v) * at(i + 1, j) + v * at(i + 1, j + 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HS: PotentialModel = PotentialModel::HardSphere { radius: 2e-10, strength: 1e6 };

    #[test]
    fn free_motion_turning_point_and_zero_deflection() {
        let z = PotentialModel::Zero;
        for rho in [1e-11, 1e-10, 3e-10] {
            let rm = rmin_solve(&z, 5.0, rho).unwrap();
            assert!((rm - rho).abs() < 1e-12 * rho);
            assert!(scattering_angle(&z, 5.0, rho).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn hard_sphere_geometry() {
        assert!((rmin_solve(&HS, 10.0, 1e-10).unwrap() - 2e-10).abs() < 1e-12 * 2e-10);
        assert!((scattering_angle(&HS, 10.0, 0.0).unwrap() - PI).abs() < 1e-12);
        let chi = scattering_angle(&HS, 10.0, 2e-10 / 2f64.sqrt()).unwrap();
        assert!((chi - PI / 2.0).abs() < 1e-8, "{chi}");
        assert!(scattering_angle(&HS, 10.0, 2.5e-10).unwrap().abs() < 1e-8);
    }

    #[test]
    fn lennard_jones_head_on_turning_point() {
        let lj = PotentialModel::LennardJones { epsilon: 0.05, sigma: 2.9e-10 };
        let e = 50.0;
        let rm = rmin_solve(&lj, e, 0.0).unwrap();
        assert!((lj.eval(rm) - e).abs() < 1e-9 * e);
    }

    #[test]
    fn born_mayer_deflection_splits_at_the_window() {
        let bm = PotentialModel::BornMayer { a: 2000.0, b: 3e10, r_inner: 0.5e-10, r_outer: 3e-10 };
        let chi = scattering_angle(&bm, 20.0, 1.5e-10).unwrap();
        assert!(chi > 0.0 && chi < PI);
    }

    #[test]
    fn cutoff_radius() {
        // hard sphere: V vanishes right outside r_σ
        assert!((rho_max(&HS, 10.0) - 2e-10).abs() < 1e-20);
        assert_eq!(rho_max(&PotentialModel::Zero, 10.0), 0.0);
        let lj = PotentialModel::LennardJones { epsilon: 0.05, sigma: 2.9e-10 };
        assert_eq!(rho_max(&lj, 0.01), 3.0 * 2.9e-10);
        let r = rho_max(&lj, 10.0);
        assert!((lj.eval(r).abs() - 1e-2).abs() < 1e-9);
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let u = PotentialModel::UniversalModified { epsilon: 0.0, sigma: 5.29e-11, z1: 29, z2: 18 };
        let t = DeflectionTable::build(&u, 0.01, 1000.0, 81, 257).unwrap();
        for e in [0.5, 10.0, 200.0] {
            let rmax = t.rho_max(e);
            assert!((rmax - rho_max(&u, e)).abs() < 0.05 * rmax);
            for b in [0.1, 0.3, 0.6] {
                let direct = scattering_angle(&u, e, b * rmax).unwrap();
                assert!((t.chi(e, b) - direct).abs() < 0.02, "e {e} b {b}: {} vs {direct}", t.chi(e, b));
            }
        }
    }

    #[test]
    fn orbiting_region_converges() {
        // low-energy Lennard-Jones passes close to orbiting, where χ runs
        // far negative; the quadrature must still meet its error target
        let lj = PotentialModel::LennardJones { epsilon: 0.05, sigma: 2.9e-10 };
        let t = DeflectionTable::build(&lj, 1e-4, 1e4, 65, 129).unwrap();
        assert!(t.max_error < QUAD_FAILURE, "worst error estimate {}", t.max_error);
    }
}
