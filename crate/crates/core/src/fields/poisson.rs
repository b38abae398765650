use super::{FieldError, Grid};
use crate::units::{ELEMENTARY_CHARGE, EPSILON_0};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonSettings {
    /// relative residual (2-norm, normalised by the zero-guess residual)
    pub tolerance: f64,
    pub max_iterations: usize,
    /// SOR relaxation factor; `None` picks the model-problem optimum
    pub omega: Option<f64>,
}

impl Default for PoissonSettings {
    fn default() -> Self {
        PoissonSettings { tolerance: 1e-8, max_iterations: 100_000, omega: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoissonReport {
    pub iterations: usize,
    /// relative residual after each sweep
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

impl PoissonReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }
}

/// Finite-volume coefficients of node `k`: neighbours and conductances.
struct Stencil {
    nbr: [usize; 4],
    cond: [f64; 4],
    diag: f64,
    volume: f64,
}

fn stencils(grid: &Grid) -> Vec<Stencil> {
    let (nr, nz) = (grid.nr(), grid.nz());
    let pi = std::f64::consts::PI;
    let mut out = Vec::with_capacity(grid.len());
    for j in 0..nz {
        for i in 0..nr {
            let (rw, re) = grid.r_faces(i);
            let (zs, zn) = grid.z_faces(j);
            let ring = pi * (re * re - rw * rw);
            let k = grid.index(i, j);
            let mut nbr = [k; 4];
            let mut cond = [0.0; 4];
            if i > 0 {
                nbr[0] = grid.index(i - 1, j);
                cond[0] = 2.0 * pi * rw * (zn - zs) / (grid.r[i] - grid.r[i - 1]);
            }
            if i + 1 < nr {
                nbr[1] = grid.index(i + 1, j);
                cond[1] = 2.0 * pi * re * (zn - zs) / (grid.r[i + 1] - grid.r[i]);
            }
            if j > 0 {
                nbr[2] = grid.index(i, j - 1);
                cond[2] = ring / (grid.z[j] - grid.z[j - 1]);
            }
            if j + 1 < nz {
                nbr[3] = grid.index(i, j + 1);
                cond[3] = ring / (grid.z[j + 1] - grid.z[j]);
            }
            out.push(Stencil { nbr, cond, diag: cond.iter().sum(), volume: ring * (zn - zs) });
        }
    }
    out
}

fn residual_norm(st: &[Stencil], rhs: &[f64], fixed: &[Option<f64>], phi: &[f64]) -> f64 {
    st.iter()
        .enumerate()
        .filter(|(k, _)| fixed[*k].is_none())
        .map(|(k, s)| {
            let flux: f64 = (0..4).map(|m| s.cond[m] * (phi[s.nbr[m]] - phi[k])).sum();
            let r = rhs[k] * s.volume - flux;
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// Solves `∇²φ = rhs` in axisymmetric `r–z` form on `grid` by red–black
/// successive over-relaxation. Nodes with `fixed[k] = Some(v)` are
/// Dirichlet; the axis and any other unfixed boundary node carry zero flux.
pub fn solve_axisymmetric(
    grid: &Grid,
    rhs: &[f64],
    fixed: &[Option<f64>],
    initial: Option<&[f64]>,
    settings: &PoissonSettings,
) -> Result<(Vec<f64>, PoissonReport), FieldError> {
    let n = grid.len();
    assert!(rhs.len() == n && fixed.len() == n);
    let st = stencils(grid);
    let mut phi: Vec<f64> = (0..n).map(|k| fixed[k].unwrap_or(0.0)).collect();
    let reference = residual_norm(&st, rhs, fixed, &phi);
    let mut report = PoissonReport::default();
    if reference == 0.0 {
        report.converged = true;
        return Ok((phi, report));
    }
    if let Some(init) = initial {
        for k in 0..n {
            if fixed[k].is_none() {
                phi[k] = init[k];
            }
        }
    }
    let omega = settings.omega.unwrap_or_else(|| {
        let m = grid.nr().max(grid.nz()) as f64;
        2.0 / (1.0 + (std::f64::consts::PI / m).sin())
    });
    let nr = grid.nr();
    let res0 = residual_norm(&st, rhs, fixed, &phi) / reference;
    if res0 <= settings.tolerance {
        report.residual_history.push(res0);
        report.converged = true;
        return Ok((phi, report));
    }
    for it in 1..=settings.max_iterations {
        for colour in 0..2 {
            for (k, s) in st.iter().enumerate() {
                if fixed[k].is_some() || ((k % nr) + (k / nr)) % 2 != colour {
                    continue;
                }
                let mut acc = -rhs[k] * s.volume;
                for m in 0..4 {
                    acc += s.cond[m] * phi[s.nbr[m]];
                }
                let gs = acc / s.diag;
                phi[k] += omega * (gs - phi[k]);
            }
        }
        let res = residual_norm(&st, rhs, fixed, &phi) / reference;
        report.residual_history.push(res);
        report.iterations = it;
        if res <= settings.tolerance {
            report.converged = true;
            return Ok((phi, report));
        }
    }
    Err(FieldError::NotConverged {
        iterations: report.iterations,
        residual: report.final_residual(),
        tolerance: settings.tolerance,
    })
}

/// Electrode layout for the chamber Poisson problem: the cathode disk
/// (radius `radius`) on the bottom plane at `-V_appl`, every other wall grounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CathodeBoundary {
    pub radius: f64,
}

impl CathodeBoundary {
    pub fn dirichlet(&self, grid: &Grid, applied_voltage: f64) -> Vec<Option<f64>> {
        let (nr, nz) = (grid.nr(), grid.nz());
        (0..grid.len())
            .map(|k| {
                let (i, j) = (k % nr, k / nr);
                if j == 0 {
                    Some(if grid.r[i] <= self.radius * (1.0 + 1e-12) { -applied_voltage } else { 0.0 })
                } else if j == nz - 1 || i == nr - 1 {
                    Some(0.0)
                } else {
                    None
                }
            })
            .collect()
    }
}

/// Potential from ion and electron densities (m⁻³) with the cathode at
/// `-V_appl` and grounded walls: `∇²φ = -(e/ε₀)(n_i - n_e)`.
pub fn poisson_solve(
    grid: &Grid,
    n_i: &[f64],
    n_e: &[f64],
    applied_voltage: f64,
    cathode: CathodeBoundary,
    initial: Option<&[f64]>,
    settings: &PoissonSettings,
) -> Result<(Vec<f64>, PoissonReport), FieldError> {
    let rhs: Vec<f64> = n_i.iter().zip(n_e).map(|(ni, ne)| -ELEMENTARY_CHARGE / EPSILON_0 * (ni - ne)).collect();
    let fixed = cathode.dirichlet(grid, applied_voltage);
    solve_axisymmetric(grid, &rhs, &fixed, initial, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn neutral_plasma_without_bias_gives_zero() {
        let g = Grid::uniform(9, 9, 0.05, 0.0, 0.05).unwrap();
        let n = vec![1e15; g.len()];
        let (phi, rep) =
            poisson_solve(&g, &n, &n, 0.0, CathodeBoundary { radius: 0.05 }, None, &PoissonSettings::default()).unwrap();
        assert!(phi.iter().all(|&v| v == 0.0));
        assert!(rep.converged);
    }

    /// φ* = sin(πz/L) r² has ∇²φ* = sin(πz/L) (4 - (π/L)² r²).
    fn manufactured_error(cells: usize) -> (f64, PoissonReport) {
        let (radius, len) = (0.5, 1.0);
        let g = Grid::uniform(cells + 1, cells + 1, radius, 0.0, len).unwrap();
        let exact = |r: f64, z: f64| (PI * z / len).sin() * r * r;
        let rhs: Vec<f64> = (0..g.len())
            .map(|k| {
                let (r, z) = (g.r[k % g.nr()], g.z[k / g.nr()]);
                (PI * z / len).sin() * (4.0 - (PI / len).powi(2) * r * r)
            })
            .collect();
        let fixed: Vec<Option<f64>> = (0..g.len())
            .map(|k| {
                let (i, j) = (k % g.nr(), k / g.nr());
                (j == 0 || j == g.nz() - 1 || i == g.nr() - 1).then(|| exact(g.r[i], g.z[j]))
            })
            .collect();
        let settings = PoissonSettings { tolerance: 1e-13, ..Default::default() };
        let (phi, rep) = solve_axisymmetric(&g, &rhs, &fixed, None, &settings).unwrap();
        let err = (0..g.len())
            .map(|k| (phi[k] - exact(g.r[k % g.nr()], g.z[k / g.nr()])).abs())
            .fold(0.0, f64::max);
        (err, rep)
    }

    #[test]
    fn manufactured_solution_converges_at_second_order() {
        let (e1, _) = manufactured_error(16);
        let (e2, _) = manufactured_error(32);
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.1, "order {order}");
    }

    #[test]
    fn residual_decreases_every_sweep() {
        let (_, rep) = manufactured_error(24);
        assert!(rep.converged);
        for w in rep.residual_history.windows(2) {
            assert!(w[1] < w[0], "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn planar_gap_is_linear() {
        // wide, short domain: the potential between cathode and grounded top
        // wall is the 1D Laplace profile away from the side wall
        let (radius, height, v) = (0.2, 0.01, 300.0);
        let g = Grid::uniform(81, 21, radius, 0.0, height).unwrap();
        let n = vec![0.0; g.len()];
        let (phi, _) =
            poisson_solve(&g, &n, &n, v, CathodeBoundary { radius }, None, &PoissonSettings::default()).unwrap();
        for j in 0..g.nz() {
            let oracle = -v * (1.0 - g.z[j] / height);
            let got = phi[g.index(0, j)];
            assert!((got - oracle).abs() <= 0.01 * v, "z = {}: {got} vs {oracle}", g.z[j]);
        }
    }

    #[test]
    fn iteration_cap_is_reported() {
        let g = Grid::uniform(33, 33, 0.05, 0.0, 0.05).unwrap();
        let n = vec![0.0; g.len()];
        let s = PoissonSettings { tolerance: 1e-12, max_iterations: 3, omega: None };
        let e = poisson_solve(&g, &n, &n, 300.0, CathodeBoundary { radius: 0.03 }, None, &s).unwrap_err();
        assert!(matches!(e, FieldError::NotConverged { iterations: 3, .. }));
    }
}
