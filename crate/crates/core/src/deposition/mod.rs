//! Geometric deposition tallies on the substrate and chamber walls:
//! thickness maps, incidence-angle and impact-energy distributions.
//!
//! Wall thicknesses are reported like any other surface, but far from the
//! substrate they rest on few, heavily scattered arrivals and should be
//! read as indicative.

mod mesh;
mod tally;

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{Arrival, ModelError};
use crate::units::ev_from_speed;

pub use mesh::{facing_normal, incidence_angle, Cell, Hit, Shape, Surface, SurfaceMesh, SurfaceRole};
pub use tally::{Binning, CellTally, DepositionTally, SurfaceTally};

pub const SURFACE_HEADER: [&str; 7] = ["cell_id", "r", "z", "area", "count", "weight", "thickness_m"];
pub const HISTOGRAM_HEADER: [&str; 5] = ["bin", "lo", "hi", "count", "fraction"];
pub const PROFILE_HEADER: [&str; 7] = ["band", "lo", "hi", "count", "weight", "thickness_m", "thickness_sigma_m"];

#[derive(Debug, Error)]
pub enum DepositionError {
    #[error("mesh: {0}")]
    Mesh(String),
    #[error("unknown cell {cell} on surface `{surface}`")]
    UnknownCell { surface: String, cell: usize },
    #[error("unknown surface `{0}`")]
    UnknownSurface(String),
    #[error("atomic volume must be positive, got {0}")]
    AtomicVolume(f64),
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Film thickness per cell, `Σw · Ω / area`, one vector per surface.
pub fn thickness_map(tally: &DepositionTally, mesh: &SurfaceMesh, atomic_volume: f64) -> Result<Vec<Vec<f64>>, DepositionError> {
    if !(atomic_volume > 0.0 && atomic_volume.is_finite()) {
        return Err(DepositionError::AtomicVolume(atomic_volume));
    }
    if tally.surfaces.len() != mesh.surfaces.len() {
        return Err(DepositionError::Mesh("tally and mesh disagree".into()));
    }
    Ok(mesh
        .surfaces
        .iter()
        .zip(&tally.surfaces)
        .map(|(s, t)| s.cells.iter().zip(&t.cells).map(|(c, ct)| ct.weight * atomic_volume / c.area).collect())
        .collect())
}

/// Thickness of one radial (disk) or axial (cylinder) band, summed over azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileBin {
    pub band: usize,
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    pub weight: f64,
    pub thickness: f64,
    /// one-sigma counting error of `thickness`
    pub thickness_sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distributions {
    pub angle_edges: Vec<f64>,
    pub angle_counts: Vec<u64>,
    pub angle_fraction: Vec<f64>,
    pub energy_edges: Vec<f64>,
    pub energy_counts: Vec<u64>,
    pub energy_fraction: Vec<f64>,
    pub profile: Vec<ProfileBin>,
}

fn fractions(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    counts.iter().map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 }).collect()
}

/// Histograms (raw and normalised to unit sum) and the band profile of one surface.
pub fn distributions(
    tally: &DepositionTally,
    mesh: &SurfaceMesh,
    surface: &str,
    atomic_volume: f64,
) -> Result<Distributions, DepositionError> {
    let si = mesh.index_of(surface).ok_or_else(|| DepositionError::UnknownSurface(surface.into()))?;
    let (s, t) = (&mesh.surfaces[si], &tally.surfaces[si]);
    let angle_counts = t.angle_counts();
    let energy_counts = t.energy_counts();
    let profile = (0..s.bands)
        .map(|band| {
            let (lo, hi) = s.band_edges(band);
            let cells = band * s.sectors..(band + 1) * s.sectors;
            let area: f64 = s.cells[cells.clone()].iter().map(|c| c.area).sum();
            let count = t.cells[cells.clone()].iter().map(|c| c.count).sum();
            let weight: f64 = t.cells[cells.clone()].iter().map(|c| c.weight).sum();
            let wsq: f64 = t.cells[cells].iter().map(|c| c.weight_sq).sum();
            let scale = atomic_volume / area;
            ProfileBin { band, lo, hi, count, weight, thickness: weight * scale, thickness_sigma: wsq.sqrt() * scale }
        })
        .collect();
    Ok(Distributions {
        angle_edges: tally.angle_bins.edges(),
        angle_fraction: fractions(&angle_counts),
        angle_counts,
        energy_edges: tally.energy_bins.edges(),
        energy_fraction: fractions(&energy_counts),
        energy_counts,
        profile,
    })
}

/// Weight per azimuthal sector of one band of a surface.
pub fn azimuthal_profile(tally: &DepositionTally, mesh: &SurfaceMesh, surface: &str, band: usize) -> Result<Vec<f64>, DepositionError> {
    let si = mesh.index_of(surface).ok_or_else(|| DepositionError::UnknownSurface(surface.into()))?;
    let s = &mesh.surfaces[si];
    if band >= s.bands {
        return Err(DepositionError::UnknownCell { surface: surface.into(), cell: band * s.sectors });
    }
    Ok(tally.surfaces[si].cells[band * s.sectors..(band + 1) * s.sectors].iter().map(|c| c.weight).collect())
}

const CHUNK: usize = 4096;

/// Tallies a list of arrivals of atoms with mass `mass` (kg). Arrivals are
/// accumulated in fixed-size chunks merged in order, so the result does not
/// depend on the number of workers.
pub fn deposit(
    mesh: &SurfaceMesh,
    arrivals: &[Arrival],
    mass: f64,
    angle_bins: usize,
    energy_bins: Binning,
) -> Result<DepositionTally, DepositionError> {
    let empty = DepositionTally::new(mesh, angle_bins, energy_bins);
    let parts: Vec<Result<DepositionTally, DepositionError>> = arrivals
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut t = empty.clone();
            for a in chunk {
                let si = mesh.index_of(&a.surface).ok_or_else(|| DepositionError::UnknownSurface(a.surface.clone()))?;
                let v = a.velocity();
                let n = facing_normal(&mesh.surfaces[si].shape, &a.position(), &v);
                t.add(si, a.cell, incidence_angle(&v, &n), ev_from_speed(v.norm(), mass), a.weight)?;
            }
            Ok(t)
        })
        .collect();
    let mut total = empty;
    for p in parts {
        total.merge(&p?)?;
    }
    Ok(total)
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> DepositionError {
    DepositionError::Io { path: path.display().to_string(), message: e.to_string() }
}

fn write_rows<R: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<(), DepositionError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// `cell_id,r,z,area,count,weight,thickness_m` for one surface.
pub fn write_surface_csv(path: &Path, surface: &Surface, tally: &SurfaceTally, thickness: &[f64]) -> Result<(), DepositionError> {
    let rows = surface
        .cells
        .iter()
        .zip(&tally.cells)
        .zip(thickness)
        .map(|((c, t), th)| (c.id, c.r, c.z, c.area, t.count, t.weight, *th));
    write_rows(path, &SURFACE_HEADER, rows)
}

/// `bin,lo,hi,count,fraction`, bin edges included on every row.
pub fn write_histogram_csv(path: &Path, edges: &[f64], counts: &[u64], fraction: &[f64]) -> Result<(), DepositionError> {
    let rows = counts.iter().enumerate().map(|(i, &c)| (i, edges[i], edges[i + 1], c, fraction[i]));
    write_rows(path, &HISTOGRAM_HEADER, rows)
}

pub fn write_profile_csv(path: &Path, profile: &[ProfileBin]) -> Result<(), DepositionError> {
    let rows = profile.iter().map(|b| (b.band, b.lo, b.hi, b.count, b.weight, b.thickness, b.thickness_sigma));
    write_rows(path, &PROFILE_HEADER, rows)
}

/// Per-surface totals for the run summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceSummary {
    pub name: String,
    pub role: SurfaceRole,
    pub count: u64,
    pub weight: f64,
    pub area: f64,
    pub mean_thickness_m: f64,
}

pub fn surface_summaries(tally: &DepositionTally, mesh: &SurfaceMesh, atomic_volume: f64) -> Vec<SurfaceSummary> {
    mesh.surfaces
        .iter()
        .zip(&tally.surfaces)
        .map(|(s, t)| SurfaceSummary {
            name: s.name.clone(),
            role: s.role,
            count: t.count(),
            weight: t.weight(),
            area: s.area(),
            mean_thickness_m: t.weight() * atomic_volume / s.area(),
        })
        .collect()
}

/// Writes every per-surface and histogram file into `dir` and returns the
/// file names written, in order.
pub fn write_outputs(
    dir: &Path,
    tally: &DepositionTally,
    mesh: &SurfaceMesh,
    atomic_volume: f64,
) -> Result<Vec<String>, DepositionError> {
    let thickness = thickness_map(tally, mesh, atomic_volume)?;
    let mut files = Vec::new();
    for (i, s) in mesh.surfaces.iter().enumerate() {
        if s.role == SurfaceRole::Pump {
            continue;
        }
        let name = format!("surface_{}.csv", s.name);
        write_surface_csv(&dir.join(&name), s, &tally.surfaces[i], &thickness[i])?;
        files.push(name);
        let d = distributions(tally, mesh, &s.name, atomic_volume)?;
        let name = format!("hist_angle_{}.csv", s.name);
        write_histogram_csv(&dir.join(&name), &d.angle_edges, &d.angle_counts, &d.angle_fraction)?;
        files.push(name);
        let name = format!("hist_energy_{}.csv", s.name);
        write_histogram_csv(&dir.join(&name), &d.energy_edges, &d.energy_counts, &d.energy_fraction)?;
        files.push(name);
        let name = format!("profile_{}.csv", s.name);
        write_profile_csv(&dir.join(&name), &d.profile)?;
        files.push(name);
    }
    Ok(files)
}

/// Writes `value` as pretty JSON followed by a newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), DepositionError> {
    let mut f = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| io_err(path, e))?;
    f.write_all(b"\n").map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Chamber, DepositionConfig, Particle, ParticleState, SpeciesId};
    use crate::Vec3;

    fn setup() -> (SurfaceMesh, DepositionTally) {
        let mesh = SurfaceMesh::chamber(&Chamber::default(), &DepositionConfig::default()).unwrap();
        let tally = DepositionTally::new(&mesh, 64, Binning::new(64, 0.0, 100.0).unwrap());
        (mesh, tally)
    }

    #[test]
    fn normal_incidence_lands_in_angle_bin_zero() {
        let (mesh, mut tally) = setup();
        let mut p = Particle::new(SpeciesId(0), Vec3::new(0.0, 0.0, 0.08), Vec3::new(0.0, 0.0, 1000.0), 1.0).unwrap();
        let si = mesh.index_of("substrate").unwrap();
        tally.record_hit(&mesh, si, 0, &Vec3::new(0.0, 0.0, -1.0), &mut p, 1e-25).unwrap();
        assert_eq!(p.state(), ParticleState::Absorbed);
        assert_eq!(tally.surfaces[si].cells[0].angle[0], 1);
        assert_eq!(tally.total_count(), 1);
    }

    #[test]
    fn empty_tally_is_all_zero() {
        let (mesh, tally) = setup();
        assert_eq!(tally.total_count(), 0);
        let th = thickness_map(&tally, &mesh, 1.18e-29).unwrap();
        assert!(th.iter().flatten().all(|&t| t == 0.0));
    }

    #[test]
    fn weights_add_and_unknown_cells_fail() {
        let (mesh, mut tally) = setup();
        for _ in 0..7 {
            tally.add(1, 3, 0.2, 5.0, 2.5).unwrap();
        }
        assert_eq!(tally.surfaces[1].cells[3].weight, 17.5);
        assert!(matches!(tally.add(1, 100_000, 0.0, 0.0, 1.0), Err(DepositionError::UnknownCell { .. })));
        let mut p = Particle::new(SpeciesId(0), Vec3::zeros(), Vec3::new(0.0, 0.0, 1.0), 1.0).unwrap();
        assert!(tally.record_hit(&mesh, 1, 100_000, &Vec3::z(), &mut p, 1.0).is_err());
        assert_eq!(p.state(), ParticleState::Active);
    }

    #[test]
    fn thickness_unit_arithmetic() {
        let cell = Surface::new("sq", Shape::Disk { z: 0.0, r_inner: 0.0, r_outer: (1e-4 / std::f64::consts::PI).sqrt() }, SurfaceRole::Deposit, 1, 1)
            .unwrap();
        let mesh = SurfaceMesh::new(vec![cell]).unwrap();
        let mut tally = DepositionTally::new(&mesh, 4, Binning::new(4, 0.0, 1.0).unwrap());
        tally.add(0, 0, 0.0, 0.5, 1e6).unwrap();
        let th = thickness_map(&tally, &mesh, 1.18e-29).unwrap();
        assert!((th[0][0] - 1.18e-19).abs() < 1e-30);
        let mut doubled = tally.clone();
        doubled.merge(&tally).unwrap();
        let th2 = thickness_map(&doubled, &mesh, 1.18e-29).unwrap();
        assert!((th2[0][0] - 2.0 * th[0][0]).abs() <= 1e-15 * th[0][0]);
        assert!(thickness_map(&tally, &mesh, 0.0).is_err());
    }

    #[test]
    fn monoenergetic_stream_fills_one_energy_bin() {
        let (mesh, mut tally) = setup();
        for i in 0..50 {
            tally.add(1, i % 40, 0.3, 42.0, 1.0).unwrap();
        }
        let d = distributions(&tally, &mesh, "substrate", 1.18e-29).unwrap();
        assert_eq!(d.energy_counts.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(d.energy_counts.iter().sum::<u64>(), 50);
        assert!((d.energy_fraction.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(d.profile.iter().map(|b| b.count).sum::<u64>(), 50);
        assert!(distributions(&tally, &mesh, "nowhere", 1.0).is_err());
    }
}
