use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::model::{Chamber, DepositionConfig};
use crate::Vec3;

use super::DepositionError;

/// Geometry of one surface. Disks lie in a `z` plane, cylinders are
/// coaxial with the chamber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Shape {
    Disk { z: f64, r_inner: f64, r_outer: f64 },
    Cylinder { radius: f64, z_min: f64, z_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceRole {
    /// arrivals stick
    Deposit,
    /// arrivals leave the chamber
    Pump,
}

/// One tessellation cell. Disk cells are annular sectors, cylinder cells
/// are axial bands split in azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: usize,
    /// radial or axial band index
    pub band: usize,
    pub sector: usize,
    pub area: f64,
    /// centre `(r, z)`
    pub r: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub name: String,
    pub shape: Shape,
    pub role: SurfaceRole,
    pub bands: usize,
    pub sectors: usize,
    pub cells: Vec<Cell>,
}

impl Surface {
    pub fn new(name: &str, shape: Shape, role: SurfaceRole, bands: usize, sectors: usize) -> Result<Self, DepositionError> {
        if bands == 0 || sectors == 0 {
            return Err(DepositionError::Mesh(format!("surface `{name}` needs at least one cell")));
        }
        let ok = match shape {
            Shape::Disk { r_inner, r_outer, z } => r_inner >= 0.0 && r_outer > r_inner && z.is_finite(),
            Shape::Cylinder { radius, z_min, z_max } => radius > 0.0 && z_max > z_min,
        };
        if !ok {
            return Err(DepositionError::Mesh(format!("surface `{name}` has degenerate extent")));
        }
        let dphi = TAU / sectors as f64;
        let mut cells = Vec::with_capacity(bands * sectors);
        for band in 0..bands {
            let (lo, hi) = band_edges(&shape, bands, band);
            let (area, r, z) = match shape {
                Shape::Disk { z, .. } => (0.5 * dphi * (hi * hi - lo * lo), 0.5 * (lo + hi), z),
                Shape::Cylinder { radius, .. } => (radius * dphi * (hi - lo), radius, 0.5 * (lo + hi)),
            };
            for sector in 0..sectors {
                cells.push(Cell { id: band * sectors + sector, band, sector, area, r, z });
            }
        }
        Ok(Surface { name: name.to_string(), shape, role, bands, sectors, cells })
    }

    pub fn is_disk(&self) -> bool {
        matches!(self.shape, Shape::Disk { .. })
    }

    pub fn area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    /// `(lo, hi)` of a band: radii for disks, heights for cylinders.
    pub fn band_edges(&self, band: usize) -> (f64, f64) {
        band_edges(&self.shape, self.bands, band)
    }

    /// Cell containing a point lying on the surface.
    pub fn cell_at(&self, p: &Vec3) -> usize {
        let (coord, lo, hi) = match self.shape {
            Shape::Disk { r_inner, r_outer, .. } => (p.x.hypot(p.y), r_inner, r_outer),
            Shape::Cylinder { z_min, z_max, .. } => (p.z, z_min, z_max),
        };
        let band = (((coord - lo) / (hi - lo) * self.bands as f64) as usize).min(self.bands - 1);
        let phi = p.y.atan2(p.x).rem_euclid(TAU);
        let sector = ((phi / TAU * self.sectors as f64) as usize).min(self.sectors - 1);
        band * self.sectors + sector
    }

    /// Distance along `dir` (unit) from `origin` to this surface, if reached
    /// within `max_s`, plus the surface normal facing the incoming particle.
    fn intersect(&self, origin: &Vec3, dir: &Vec3, max_s: f64) -> Option<(f64, Vec3)> {
        const EPS: f64 = 1e-12;
        match self.shape {
            Shape::Disk { z, r_inner, r_outer } => {
                if dir.z == 0.0 {
                    return None;
                }
                let s = (z - origin.z) / dir.z;
                if !(s > EPS && s <= max_s) {
                    return None;
                }
                let r = (origin.x + s * dir.x).hypot(origin.y + s * dir.y);
                (r >= r_inner && r <= r_outer).then(|| (s, facing_normal(&self.shape, &origin, dir)))
            }
            Shape::Cylinder { radius, z_min, z_max } => {
                let a = dir.x * dir.x + dir.y * dir.y;
                if a == 0.0 {
                    return None;
                }
                let b = origin.x * dir.x + origin.y * dir.y;
                let c = origin.x * origin.x + origin.y * origin.y - radius * radius;
                let disc = b * b - a * c;
                if disc < 0.0 {
                    return None;
                }
                let sq = disc.sqrt();
                // roots of a s² + 2 b s + c; the far one is the exit from inside
                let s = if c <= 0.0 { (-b + sq) / a } else { [(-b - sq) / a, (-b + sq) / a].into_iter().find(|&s| s > EPS)? };
                if !(s > EPS && s <= max_s) {
                    return None;
                }
                let p = origin + s * dir;
                if p.z < z_min || p.z > z_max {
                    return None;
                }
                Some((s, facing_normal(&self.shape, &p, dir)))
            }
        }
    }
}

/// Unit normal of `shape` at `point` pointing back against `dir`.
pub fn facing_normal(shape: &Shape, point: &Vec3, dir: &Vec3) -> Vec3 {
    match *shape {
        Shape::Disk { .. } => Vec3::new(0.0, 0.0, if dir.z > 0.0 { -1.0 } else { 1.0 }),
        Shape::Cylinder { .. } => {
            let radial = Vec3::new(point.x, point.y, 0.0).normalize();
            if radial.dot(dir) > 0.0 {
                -radial
            } else {
                radial
            }
        }
    }
}

fn band_edges(shape: &Shape, bands: usize, band: usize) -> (f64, f64) {
    let (lo, hi) = match *shape {
        Shape::Disk { r_inner, r_outer, .. } => (r_inner, r_outer),
        Shape::Cylinder { z_min, z_max, .. } => (z_min, z_max),
    };
    let w = (hi - lo) / bands as f64;
    (lo + w * band as f64, if band + 1 == bands { hi } else { lo + w * (band + 1) as f64 })
}

/// A surface crossing found by [`SurfaceMesh::first_hit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub surface: usize,
    pub cell: usize,
    pub distance: f64,
    pub point: Vec3,
    /// unit normal facing the incoming particle
    pub normal: Vec3,
}

/// Incidence angle `arccos(v̂·(−n̂))` against a normal facing the particle.
pub fn incidence_angle(velocity: &Vec3, normal: &Vec3) -> f64 {
    let c = -velocity.dot(normal) / velocity.norm();
    c.clamp(-1.0, 1.0).acos()
}

/// Named surfaces of the chamber. Earlier surfaces win ties.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    pub surfaces: Vec<Surface>,
}

impl SurfaceMesh {
    pub fn new(surfaces: Vec<Surface>) -> Result<Self, DepositionError> {
        for (i, s) in surfaces.iter().enumerate() {
            if surfaces[..i].iter().any(|o| o.name == s.name) {
                return Err(DepositionError::Mesh(format!("duplicate surface name `{}`", s.name)));
            }
        }
        Ok(SurfaceMesh { surfaces })
    }

    /// Target plane, substrate, shields, top plate (split around the pump
    /// port) and the cylindrical side wall.
    pub fn chamber(chamber: &Chamber, dep: &DepositionConfig) -> Result<Self, DepositionError> {
        let nr = dep.radial_cells;
        let nphi = dep.azimuthal_cells;
        let disk = |z, r_inner, r_outer| Shape::Disk { z, r_inner, r_outer };
        let mut surfaces = vec![
            Surface::new("target", disk(chamber.target_z, 0.0, chamber.target_radius), SurfaceRole::Deposit, nr, nphi)?,
            Surface::new("substrate", disk(chamber.substrate_z, 0.0, chamber.substrate_radius), SurfaceRole::Deposit, nr, nphi)?,
        ];
        if chamber.target_radius < chamber.radius {
            surfaces.push(Surface::new(
                "cathode_shield",
                disk(chamber.target_z, chamber.target_radius, chamber.radius),
                SurfaceRole::Deposit,
                nr,
                nphi,
            )?);
        }
        for sh in &dep.shields {
            surfaces.push(Surface::new(&sh.name, disk(sh.z, sh.r_inner, sh.r_outer), SurfaceRole::Deposit, nr, nphi)?);
        }
        let top = chamber.top_z();
        match &dep.pump {
            Some(p) => {
                surfaces.push(Surface::new("pump", disk(top, p.r_inner, p.r_outer), SurfaceRole::Pump, 1, 1)?);
                if p.r_inner > 0.0 {
                    surfaces.push(Surface::new("top", disk(top, 0.0, p.r_inner), SurfaceRole::Deposit, nr, nphi)?);
                }
                if p.r_outer < chamber.radius {
                    surfaces.push(Surface::new(
                        "top_outer",
                        disk(top, p.r_outer, chamber.radius),
                        SurfaceRole::Deposit,
                        nr,
                        nphi,
                    )?);
                }
            }
            None => surfaces.push(Surface::new("top", disk(top, 0.0, chamber.radius), SurfaceRole::Deposit, nr, nphi)?),
        }
        surfaces.push(Surface::new(
            "wall",
            Shape::Cylinder { radius: chamber.radius, z_min: chamber.target_z, z_max: top },
            SurfaceRole::Deposit,
            dep.wall_axial_cells,
            nphi,
        )?);
        Self::new(surfaces)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.surfaces.iter().position(|s| s.name == name)
    }

    /// First surface crossed by the segment `origin + s·dir`, `0 < s ≤ max_s`.
    pub fn first_hit(&self, origin: &Vec3, dir: &Vec3, max_s: f64) -> Option<Hit> {
        let mut best: Option<(usize, f64, Vec3)> = None;
        for (i, surf) in self.surfaces.iter().enumerate() {
            let limit = best.map_or(max_s, |b| b.1);
            if let Some((s, n)) = surf.intersect(origin, dir, limit) {
                if best.is_none_or(|b| s < b.1) {
                    best = Some((i, s, n));
                }
            }
        }
        best.map(|(surface, distance, normal)| {
            let point = origin + distance * dir;
            Hit { surface, cell: self.surfaces[surface].cell_at(&point), distance, point, normal }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh() -> SurfaceMesh {
        SurfaceMesh::chamber(&Chamber::default(), &DepositionConfig::default()).unwrap()
    }

    #[test]
    fn cells_tile_each_surface() {
        for s in &mesh().surfaces {
            let exact = match s.shape {
                Shape::Disk { r_inner, r_outer, .. } => std::f64::consts::PI * (r_outer * r_outer - r_inner * r_inner),
                Shape::Cylinder { radius, z_min, z_max } => TAU * radius * (z_max - z_min),
            };
            assert!((s.area() - exact).abs() < 1e-12 * exact, "{}", s.name);
            assert!(s.cells.iter().all(|c| c.area > 0.0));
            assert!(s.cells.iter().enumerate().all(|(i, c)| c.id == i));
        }
    }

    #[test]
    fn straight_up_from_the_target_hits_the_substrate() {
        let m = mesh();
        let hit = m.first_hit(&Vec3::new(0.01, 0.0, 0.0), &Vec3::new(0.0, 0.0, 1.0), f64::INFINITY).unwrap();
        assert_eq!(m.surfaces[hit.surface].name, "substrate");
        assert!((hit.distance - 0.08).abs() < 1e-15);
        assert_eq!(incidence_angle(&Vec3::new(0.0, 0.0, 3.0), &hit.normal), 0.0);
        assert!(m.first_hit(&Vec3::new(0.01, 0.0, 0.0), &Vec3::new(0.0, 0.0, 1.0), 0.05).is_none());
    }

    #[test]
    fn sideways_hits_the_wall() {
        let m = mesh();
        let d = Vec3::new(1.0, 0.0, 0.0);
        let hit = m.first_hit(&Vec3::new(0.02, 0.0, 0.05), &d, f64::INFINITY).unwrap();
        assert_eq!(m.surfaces[hit.surface].name, "wall");
        assert!((hit.distance - 0.08).abs() < 1e-14);
        assert!((hit.normal - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pump_splits_the_top() {
        let mut dep = DepositionConfig::default();
        dep.pump = Some(crate::model::PumpConfig { r_inner: 0.06, r_outer: 0.08 });
        let m = SurfaceMesh::chamber(&Chamber::default(), &dep).unwrap();
        let up = Vec3::new(0.0, 0.0, 1.0);
        let name = |x: f64| m.surfaces[m.first_hit(&Vec3::new(x, 0.0, 0.09), &up, 1.0).unwrap().surface].name.clone();
        assert_eq!(name(0.07), "pump");
        assert_eq!(name(0.055), "top");
        assert_eq!(name(0.09), "top_outer");
    }
}
