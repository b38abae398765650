//! Explicit finite-volume update of a species density.

use std::f64::consts::{PI, TAU};

use super::PlasmaError;
use crate::fields::Grid;

/// Which boundary nodes are held at zero density after the update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DensityBoundary {
    /// bottom row (the cathode plane)
    pub cathode: bool,
    /// outer radius and top row
    pub walls: bool,
}

impl DensityBoundary {
    pub const OPEN: DensityBoundary = DensityBoundary { cathode: false, walls: false };
    /// electrons are lost at every surface
    pub const ELECTRONS: DensityBoundary = DensityBoundary { cathode: true, walls: true };
    /// ions leave through the cathode by their flux only
    pub const IONS: DensityBoundary = DensityBoundary { cathode: false, walls: true };
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityOutcome {
    pub density: Vec<f64>,
    /// nodes where the update went negative and was reset to zero
    pub clamped: usize,
}

/// Net outflow (s⁻¹) of every control volume for the node fluxes
/// `(j_r, j_z)`. Face fluxes are averages of the adjacent nodes; boundary
/// faces take the boundary node value. Interior faces cancel pairwise, so
/// the sum over all nodes is exactly the boundary outflow.
pub fn net_outflow(grid: &Grid, j_r: &[f64], j_z: &[f64]) -> Vec<f64> {
    let (nr, nz) = (grid.nr(), grid.nz());
    let mut out = vec![0.0; grid.len()];
    for j in 0..nz {
        let (z0, z1) = grid.z_faces(j);
        for i in 0..nr {
            let k = grid.index(i, j);
            let (_, rf) = grid.r_faces(i);
            let area = TAU * rf * (z1 - z0);
            let flux = if i + 1 < nr { 0.5 * (j_r[k] + j_r[k + 1]) } else { j_r[k] };
            let q = flux * area;
            out[k] += q;
            if i + 1 < nr {
                out[k + 1] -= q;
            }
        }
    }
    for i in 0..nr {
        let (r0, r1) = grid.r_faces(i);
        let area = PI * (r1 * r1 - r0 * r0);
        // bottom boundary: flux along +z enters
        let k0 = grid.index(i, 0);
        out[k0] -= j_z[k0] * area;
        for j in 0..nz {
            let k = grid.index(i, j);
            let flux = if j + 1 < nz { 0.5 * (j_z[k] + j_z[k + nr]) } else { j_z[k] };
            let q = flux * area;
            out[k] += q;
            if j + 1 < nz {
                out[k + nr] -= q;
            }
        }
    }
    out
}

/// Total number of particles `Σ n V` on the grid.
pub fn total_particles(grid: &Grid, n: &[f64]) -> f64 {
    grid.node_volumes().iter().zip(n).map(|(v, n)| v * n).sum()
}

/// `n' = n + Δt (R - ∇·J)` with a conservative axisymmetric divergence.
pub fn continuity_step(
    grid: &Grid,
    n: &[f64],
    j_r: &[f64],
    j_z: &[f64],
    source: &[f64],
    dt: f64,
    boundary: DensityBoundary,
) -> Result<ContinuityOutcome, PlasmaError> {
    let len = grid.len();
    if [n.len(), j_r.len(), j_z.len(), source.len()].iter().any(|&l| l != len) {
        return Err(PlasmaError::Shape(format!("continuity fields must have {len} nodes")));
    }
    let out = net_outflow(grid, j_r, j_z);
    let vol = grid.node_volumes();
    let (nr, nz) = (grid.nr(), grid.nz());
    let mut clamped = 0;
    let mut density: Vec<f64> = (0..len)
        .map(|k| {
            let v = n[k] + dt * (source[k] - out[k] / vol[k]);
            if v < 0.0 {
                clamped += 1;
                0.0
            } else {
                v
            }
        })
        .collect();
    for k in 0..len {
        let (i, j) = (k % nr, k / nr);
        if (boundary.cathode && j == 0) || (boundary.walls && (i == nr - 1 || j == nz - 1)) {
            density[k] = 0.0;
        }
    }
    Ok(ContinuityOutcome { density, clamped })
}
