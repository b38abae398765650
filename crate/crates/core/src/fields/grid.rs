use std::path::Path;

use super::FieldError;

/// Structured axisymmetric `r–z` node grid. `r[0] = 0` is the axis,
/// `z[0]` the cathode plane. Node `(i, j)` is stored at `j * nr + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub r: Vec<f64>,
    pub z: Vec<f64>,
}

impl Grid {
    pub fn new(r: Vec<f64>, z: Vec<f64>) -> Result<Self, FieldError> {
        if r.len() < 2 || z.len() < 2 {
            return Err(FieldError::Grid("need at least two nodes per direction".into()));
        }
        if r[0] != 0.0 {
            return Err(FieldError::Grid("first radial node must sit on the axis".into()));
        }
        if !r.windows(2).all(|w| w[1] > w[0]) || !z.windows(2).all(|w| w[1] > w[0]) {
            return Err(FieldError::Grid("node coordinates must be strictly increasing".into()));
        }
        Ok(Grid { r, z })
    }

    pub fn uniform(nr: usize, nz: usize, radius: f64, z0: f64, height: f64) -> Result<Self, FieldError> {
        if nr < 2 || nz < 2 {
            return Err(FieldError::Grid("need at least two nodes per direction".into()));
        }
        let r = (0..nr).map(|i| radius * i as f64 / (nr - 1) as f64).collect();
        let z = (0..nz).map(|j| z0 + height * j as f64 / (nz - 1) as f64).collect();
        Grid::new(r, z)
    }

    /// Uniform spacing within `fine_zone` of the cathode, then spacings
    /// growing geometrically by `stretch` per cell up to the top wall.
    pub fn stretched(
        nr: usize,
        nz: usize,
        radius: f64,
        z0: f64,
        height: f64,
        stretch: f64,
        fine_zone: f64,
    ) -> Result<Self, FieldError> {
        if stretch == 1.0 || fine_zone >= height {
            return Grid::uniform(nr, nz, radius, z0, height);
        }
        if !(stretch > 1.0) || !(fine_zone > 0.0) || nz < 3 {
            return Err(FieldError::Grid("stretch must exceed 1 and the fine zone be positive".into()));
        }
        let cells = nz - 1;
        let outer_len = height - fine_zone;
        // pick the fine-cell count whose spacing best continues into the stretched part
        let (mut best, mut best_err) = (1, f64::INFINITY);
        for nf in 1..cells {
            let h = fine_zone / nf as f64;
            let no = cells - nf;
            let grown: f64 = (1..=no).map(|k| h * stretch.powi(k as i32)).sum();
            let err = (grown / outer_len).ln().abs();
            if err < best_err {
                best = nf;
                best_err = err;
            }
        }
        let h = fine_zone / best as f64;
        let no = cells - best;
        let raw: Vec<f64> = (1..=no).map(|k| h * stretch.powi(k as i32)).collect();
        let scale = outer_len / raw.iter().sum::<f64>();
        let mut z = Vec::with_capacity(nz);
        z.push(z0);
        for k in 1..=best {
            z.push(z0 + h * k as f64);
        }
        let mut acc = z0 + fine_zone;
        for dz in raw {
            acc += dz * scale;
            z.push(acc);
        }
        *z.last_mut().unwrap() = z0 + height;
        let r = (0..nr).map(|i| radius * i as f64 / (nr - 1) as f64).collect();
        Grid::new(r, z)
    }

    pub fn nr(&self) -> usize {
        self.r.len()
    }

    pub fn nz(&self) -> usize {
        self.z.len()
    }

    pub fn len(&self) -> usize {
        self.r.len() * self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.r.len() + i
    }

    pub fn radius(&self) -> f64 {
        *self.r.last().unwrap()
    }

    pub fn z_min(&self) -> f64 {
        self.z[0]
    }

    pub fn z_max(&self) -> f64 {
        *self.z.last().unwrap()
    }

    pub fn contains(&self, r: f64, z: f64) -> bool {
        r >= 0.0 && r <= self.radius() && z >= self.z_min() && z <= self.z_max()
    }

    /// Cell index and fractional offset along one axis.
    fn locate(nodes: &[f64], x: f64) -> (usize, f64) {
        let n = nodes.len();
        let k = nodes.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
        let t = ((x - nodes[k]) / (nodes[k + 1] - nodes[k])).clamp(0.0, 1.0);
        (k, t)
    }

    /// Bilinear weights of the four nodes surrounding `(r, z)`.
    pub fn weights(&self, r: f64, z: f64) -> [(usize, f64); 4] {
        let (i, tr) = Self::locate(&self.r, r);
        let (j, tz) = Self::locate(&self.z, z);
        [
            (self.index(i, j), (1.0 - tr) * (1.0 - tz)),
            (self.index(i + 1, j), tr * (1.0 - tz)),
            (self.index(i, j + 1), (1.0 - tr) * tz),
            (self.index(i + 1, j + 1), tr * tz),
        ]
    }

    pub fn interpolate(&self, values: &[f64], r: f64, z: f64) -> f64 {
        self.weights(r, z).iter().map(|&(k, w)| w * values[k]).sum()
    }

    /// Radial control-volume faces `r_{i±1/2}` clamped to `[0, R]`.
    pub fn r_faces(&self, i: usize) -> (f64, f64) {
        let lo = if i == 0 { 0.0 } else { 0.5 * (self.r[i - 1] + self.r[i]) };
        let hi = if i + 1 == self.nr() { self.radius() } else { 0.5 * (self.r[i] + self.r[i + 1]) };
        (lo, hi)
    }

    pub fn z_faces(&self, j: usize) -> (f64, f64) {
        let lo = if j == 0 { self.z[0] } else { 0.5 * (self.z[j - 1] + self.z[j]) };
        let hi = if j + 1 == self.nz() { self.z_max() } else { 0.5 * (self.z[j] + self.z[j + 1]) };
        (lo, hi)
    }

    /// Volume of the annular control volume around node `(i, j)`, m³.
    pub fn node_volume(&self, i: usize, j: usize) -> f64 {
        let (r0, r1) = self.r_faces(i);
        let (z0, z1) = self.z_faces(j);
        std::f64::consts::PI * (r1 * r1 - r0 * r0) * (z1 - z0)
    }

    pub fn node_volumes(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.node_volume(k % self.nr(), k / self.nr())).collect()
    }

    /// `-∂φ/∂r`, `-∂φ/∂z` at every node; second-order central differences
    /// inside, first-order one-sided on the boundary, `E_r = 0` on the axis.
    pub fn negative_gradient(&self, phi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (nr, nz) = (self.nr(), self.nz());
        let mut er = vec![0.0; self.len()];
        let mut ez = vec![0.0; self.len()];
        let deriv = |x: &[f64], f: &dyn Fn(usize) -> f64, k: usize| -> f64 {
            let n = x.len();
            if k == 0 {
                (f(1) - f(0)) / (x[1] - x[0])
            } else if k == n - 1 {
                (f(n - 1) - f(n - 2)) / (x[n - 1] - x[n - 2])
            } else {
                let (hm, hp) = (x[k] - x[k - 1], x[k + 1] - x[k]);
                (hm * hm * (f(k + 1) - f(k)) + hp * hp * (f(k) - f(k - 1))) / (hm * hp * (hm + hp))
            }
        };
        for j in 0..nz {
            for i in 0..nr {
                let k = self.index(i, j);
                if i > 0 {
                    er[k] = -deriv(&self.r, &|ii| phi[self.index(ii, j)], i);
                }
                ez[k] = -deriv(&self.z, &|jj| phi[self.index(i, jj)], j);
            }
        }
        (er, ez)
    }
}

pub const FIELD_MAP_HEADER: [&str; 5] = ["r", "z", "Br", "Bz", "Atheta"];

/// Fields sampled on an `r–z` grid: `B` (T), `A_θ` (T·m), `φ` (V), `E` (V/m).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    pub grid: Grid,
    pub br: Vec<f64>,
    pub bz: Vec<f64>,
    pub a_theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub er: Vec<f64>,
    pub ez: Vec<f64>,
}

impl FieldMap {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        FieldMap {
            grid,
            br: vec![0.0; n],
            bz: vec![0.0; n],
            a_theta: vec![0.0; n],
            phi: vec![0.0; n],
            er: vec![0.0; n],
            ez: vec![0.0; n],
        }
    }

    /// Samples the magnet field at every node.
    pub fn with_magnets(grid: Grid, spec: &super::MagnetSpec) -> Result<Self, FieldError> {
        let mut map = FieldMap::zeros(grid);
        for k in 0..map.grid.len() {
            let (r, z) = (map.grid.r[k % map.grid.nr()], map.grid.z[k / map.grid.nr()]);
            let (br, bz) = spec.magnetic_field_at(r, z)?;
            map.br[k] = br;
            map.bz[k] = bz;
            map.a_theta[k] = spec.vector_potential_at(r, z)?;
        }
        Ok(map)
    }

    /// Installs `phi` and recomputes `E = -∇φ`.
    pub fn set_potential(&mut self, phi: Vec<f64>) {
        assert_eq!(phi.len(), self.grid.len());
        let (er, ez) = self.grid.negative_gradient(&phi);
        self.phi = phi;
        self.er = er;
        self.ez = ez;
    }

    fn check(&self, r: f64, z: f64) -> Result<(), FieldError> {
        if self.grid.contains(r, z) {
            Ok(())
        } else {
            Err(FieldError::OutsideDomain { r, z })
        }
    }

    pub fn sample_b(&self, r: f64, z: f64) -> Result<(f64, f64), FieldError> {
        self.check(r, z)?;
        Ok((self.grid.interpolate(&self.br, r, z), self.grid.interpolate(&self.bz, r, z)))
    }

    pub fn sample_a_theta(&self, r: f64, z: f64) -> Result<f64, FieldError> {
        self.check(r, z)?;
        Ok(self.grid.interpolate(&self.a_theta, r, z))
    }

    pub fn sample_e(&self, r: f64, z: f64) -> Result<(f64, f64), FieldError> {
        self.check(r, z)?;
        Ok((self.grid.interpolate(&self.er, r, z), self.grid.interpolate(&self.ez, r, z)))
    }

    pub fn sample_phi(&self, r: f64, z: f64) -> Result<f64, FieldError> {
        self.check(r, z)?;
        Ok(self.grid.interpolate(&self.phi, r, z))
    }

    pub fn max_abs_phi(&self) -> f64 {
        self.phi.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// CSV `r,z,Br,Bz,Atheta`, SI units, `r` varying fastest.
    pub fn magnetic_csv(&self) -> String {
        let mut out = FIELD_MAP_HEADER.join(",");
        out.push('\n');
        for j in 0..self.grid.nz() {
            for i in 0..self.grid.nr() {
                let k = self.grid.index(i, j);
                out.push_str(&format!(
                    "{:e},{:e},{:e},{:e},{:e}\n",
                    self.grid.r[i], self.grid.z[j], self.br[k], self.bz[k], self.a_theta[k]
                ));
            }
        }
        out
    }

    pub fn write_magnetic_csv(&self, path: &Path) -> Result<(), FieldError> {
        std::fs::write(path, self.magnetic_csv()).map_err(|e| {
            FieldError::Model(crate::model::ModelError::Io { path: path.to_path_buf(), source: e })
        })
    }

    pub fn parse_magnetic_csv(text: &str) -> Result<Self, FieldError> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = rdr.headers().map_err(|e| FieldError::Map(e.to_string()))?.clone();
        if header.iter().collect::<Vec<_>>() != FIELD_MAP_HEADER {
            return Err(FieldError::Map(format!("expected header {}", FIELD_MAP_HEADER.join(","))));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| FieldError::Map(e.to_string()))?;
            let vals: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            let vals = vals.map_err(|e| FieldError::Map(e.to_string()))?;
            if vals.len() != 5 {
                return Err(FieldError::Map("each row needs five columns".into()));
            }
            rows.push(vals);
        }
        let nr = rows.iter().position(|v| v[1] != rows[0][1]).unwrap_or(rows.len());
        if nr < 2 || rows.len() % nr != 0 {
            return Err(FieldError::Map("rows do not form a rectangular grid".into()));
        }
        let nz = rows.len() / nr;
        let r: Vec<f64> = rows[..nr].iter().map(|v| v[0]).collect();
        let z: Vec<f64> = (0..nz).map(|j| rows[j * nr][1]).collect();
        for (k, v) in rows.iter().enumerate() {
            if v[0] != r[k % nr] || v[1] != z[k / nr] {
                return Err(FieldError::Map(format!("row {} breaks the r-fastest grid ordering", k + 1)));
            }
        }
        let mut map = FieldMap::zeros(Grid::new(r, z)?);
        for (k, v) in rows.iter().enumerate() {
            map.br[k] = v[2];
            map.bz[k] = v[3];
            map.a_theta[k] = v[4];
        }
        Ok(map)
    }

    pub fn read_magnetic_csv(path: &Path) -> Result<Self, FieldError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            FieldError::Model(crate::model::ModelError::Io { path: path.to_path_buf(), source: e })
        })?;
        Self::parse_magnetic_csv(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{CurrentLoop, MagnetSpec};

    #[test]
    fn stretched_grid_is_fine_near_cathode() {
        let g = Grid::stretched(9, 41, 0.1, 0.0, 0.1, 1.15, 0.04).unwrap();
        assert_eq!(g.nz(), 41);
        assert!((g.z_max() - 0.1).abs() < 1e-15);
        let h0 = g.z[1] - g.z[0];
        let h_top = g.z[40] - g.z[39];
        assert!(h_top > 2.0 * h0);
        // spacing is constant inside the fine zone
        for w in g.z.windows(2).take_while(|w| w[1] <= 0.04 + 1e-12) {
            assert!(((w[1] - w[0]) - h0).abs() < 1e-12);
        }
    }

    #[test]
    fn node_volumes_tile_the_cylinder() {
        let g = Grid::stretched(7, 13, 0.05, 0.0, 0.08, 1.2, 0.02).unwrap();
        let total: f64 = g.node_volumes().iter().sum();
        let exact = std::f64::consts::PI * 0.05f64.powi(2) * 0.08;
        assert!((total - exact).abs() < 1e-14 * exact.max(1.0) + 1e-15);
    }

    #[test]
    fn gradient_of_linear_potential_is_exact() {
        let g = Grid::stretched(6, 15, 0.05, 0.0, 0.1, 1.1, 0.03).unwrap();
        let phi: Vec<f64> = (0..g.len()).map(|k| 3.0 * g.r[k % g.nr()] - 7.0 * g.z[k / g.nr()]).collect();
        let (er, ez) = g.negative_gradient(&phi);
        for k in 0..g.len() {
            assert!((ez[k] - 7.0).abs() < 1e-9);
            if k % g.nr() != 0 {
                assert!((er[k] + 3.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn magnetic_csv_round_trip() {
        let spec = MagnetSpec::Loops(vec![CurrentLoop { radius: 0.03, z: -0.01, current: 800.0 }]);
        let map = FieldMap::with_magnets(Grid::uniform(5, 4, 0.1, 0.0, 0.1).unwrap(), &spec).unwrap();
        let back = FieldMap::parse_magnetic_csv(&map.magnetic_csv()).unwrap();
        assert_eq!(back.grid, map.grid);
        for k in 0..map.grid.len() {
            assert_eq!(back.br[k], map.br[k]);
            assert_eq!(back.bz[k], map.bz[k]);
            assert_eq!(back.a_theta[k], map.a_theta[k]);
        }
        // the imported map is usable as a magnet source
        let (br, bz) = MagnetSpec::Map(back).magnetic_field_at(0.0, 0.0).unwrap();
        assert_eq!(br, map.br[0]);
        assert_eq!(bz, map.bz[0]);
        assert!(FieldMap::parse_magnetic_csv("r,z,Br\n0,0,1\n").is_err());
    }
}
