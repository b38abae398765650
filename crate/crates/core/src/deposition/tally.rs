use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::model::{Particle, ParticleState};
use crate::units::joule_to_ev;
use crate::Vec3;

use super::mesh::{incidence_angle, SurfaceMesh};
use super::DepositionError;

/// Uniform bins on `[lo, hi)`. Values at or above `hi` land in the last bin
/// so that histograms conserve counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    pub bins: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Binning {
    pub fn new(bins: usize, lo: f64, hi: f64) -> Result<Self, DepositionError> {
        if bins == 0 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(DepositionError::Mesh(format!("bad binning {bins} on [{lo}, {hi})")));
        }
        Ok(Binning { bins, lo, hi })
    }

    /// Incidence angle, 0 to π/2.
    pub fn angle(bins: usize) -> Self {
        Binning { bins: bins.max(1), lo: 0.0, hi: FRAC_PI_2 }
    }

    pub fn index(&self, x: f64) -> usize {
        let f = (x - self.lo) / (self.hi - self.lo);
        if f <= 0.0 || f.is_nan() {
            0
        } else {
            ((f * self.bins as f64) as usize).min(self.bins - 1)
        }
    }

    pub fn edges(&self) -> Vec<f64> {
        let w = (self.hi - self.lo) / self.bins as f64;
        (0..=self.bins).map(|i| if i == self.bins { self.hi } else { self.lo + w * i as f64 }).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellTally {
    pub count: u64,
    pub weight: f64,
    /// Σw², for the statistical error of `weight`
    pub weight_sq: f64,
    pub angle: Vec<u64>,
    pub energy: Vec<u64>,
}

impl CellTally {
    fn new(angle_bins: usize, energy_bins: usize) -> Self {
        CellTally { count: 0, weight: 0.0, weight_sq: 0.0, angle: vec![0; angle_bins], energy: vec![0; energy_bins] }
    }

    fn merge(&mut self, other: &CellTally) {
        self.count += other.count;
        self.weight += other.weight;
        self.weight_sq += other.weight_sq;
        for (a, b) in self.angle.iter_mut().zip(&other.angle) {
            *a += b;
        }
        for (a, b) in self.energy.iter_mut().zip(&other.energy) {
            *a += b;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceTally {
    pub name: String,
    pub cells: Vec<CellTally>,
}

impl SurfaceTally {
    pub fn count(&self) -> u64 {
        self.cells.iter().map(|c| c.count).sum()
    }

    pub fn weight(&self) -> f64 {
        self.cells.iter().map(|c| c.weight).sum()
    }

    pub fn angle_counts(&self) -> Vec<u64> {
        sum_columns(self.cells.iter().map(|c| c.angle.as_slice()))
    }

    pub fn energy_counts(&self) -> Vec<u64> {
        sum_columns(self.cells.iter().map(|c| c.energy.as_slice()))
    }
}

fn sum_columns<'a>(rows: impl Iterator<Item = &'a [u64]>) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    for row in rows {
        if out.is_empty() {
            out = vec![0; row.len()];
        }
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    out
}

/// Per-cell accumulators for every surface of a mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepositionTally {
    pub angle_bins: Binning,
    /// eV
    pub energy_bins: Binning,
    pub surfaces: Vec<SurfaceTally>,
}

impl DepositionTally {
    pub fn new(mesh: &SurfaceMesh, angle_bins: usize, energy_bins: Binning) -> Self {
        let angle_bins = Binning::angle(angle_bins);
        let surfaces = mesh
            .surfaces
            .iter()
            .map(|s| SurfaceTally {
                name: s.name.clone(),
                cells: vec![CellTally::new(angle_bins.bins, energy_bins.bins); s.cells.len()],
            })
            .collect();
        DepositionTally { angle_bins, energy_bins, surfaces }
    }

    fn cell_mut(&mut self, surface: usize, cell: usize) -> Result<&mut CellTally, DepositionError> {
        let name = |t: &Self| t.surfaces.get(surface).map_or_else(|| format!("#{surface}"), |s| s.name.clone());
        let n = self.surfaces.get(surface).map_or(0, |s| s.cells.len());
        if cell >= n {
            return Err(DepositionError::UnknownCell { surface: name(self), cell });
        }
        Ok(&mut self.surfaces[surface].cells[cell])
    }

    /// Adds one arrival with incidence angle `angle` (rad) and energy `energy` (eV).
    pub fn add(&mut self, surface: usize, cell: usize, angle: f64, energy: f64, weight: f64) -> Result<(), DepositionError> {
        let (ai, ei) = (self.angle_bins.index(angle), self.energy_bins.index(energy));
        let c = self.cell_mut(surface, cell)?;
        c.count += 1;
        c.weight += weight;
        c.weight_sq += weight * weight;
        c.angle[ai] += 1;
        c.energy[ei] += 1;
        Ok(())
    }

    /// Records `particle` arriving on a cell whose normal faces it, and
    /// marks the particle absorbed.
    pub fn record_hit(
        &mut self,
        mesh: &SurfaceMesh,
        surface: usize,
        cell: usize,
        normal: &Vec3,
        particle: &mut Particle,
        mass: f64,
    ) -> Result<(), DepositionError> {
        if mesh.surfaces.get(surface).is_none_or(|s| cell >= s.cells.len()) {
            let name = mesh.surfaces.get(surface).map_or_else(|| format!("#{surface}"), |s| s.name.clone());
            return Err(DepositionError::UnknownCell { surface: name, cell });
        }
        let angle = incidence_angle(&particle.velocity, normal);
        let energy = joule_to_ev(particle.kinetic_energy(mass));
        self.add(surface, cell, angle, energy, particle.weight)?;
        particle.transition(ParticleState::Absorbed)?;
        Ok(())
    }

    /// Adds `other` cell by cell. Both must come from the same mesh.
    pub fn merge(&mut self, other: &DepositionTally) -> Result<(), DepositionError> {
        if self.surfaces.len() != other.surfaces.len()
            || self.angle_bins != other.angle_bins
            || self.energy_bins != other.energy_bins
        {
            return Err(DepositionError::Mesh("cannot merge tallies of different layouts".into()));
        }
        for (a, b) in self.surfaces.iter_mut().zip(&other.surfaces) {
            for (ca, cb) in a.cells.iter_mut().zip(&b.cells) {
                ca.merge(cb);
            }
        }
        Ok(())
    }

    pub fn total_count(&self) -> u64 {
        self.surfaces.iter().map(|s| s.count()).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.surfaces.iter().map(|s| s.weight()).sum()
    }

    pub fn surface(&self, name: &str) -> Option<&SurfaceTally> {
        self.surfaces.iter().find(|s| s.name == name)
    }
}
