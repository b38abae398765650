//! Plot-ready long-format tables built from the files of a finished run.
//! Nothing here renders; the CSVs are meant for any plotting tool.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{io_error, PipelineError, RunManifest};

pub const PLOT_PROFILE_HEADER: [&str; 8] = ["surface", "axis", "position", "lo", "hi", "count", "thickness_m", "thickness_sigma_m"];
pub const PLOT_HIST_HEADER: [&str; 6] = ["surface", "quantity", "lo", "hi", "count", "fraction"];
pub const COMPARE_HEADER: [&str; 9] =
    ["surface", "cell_id", "r", "z", "count_a", "count_b", "thickness_a_m", "thickness_b_m", "difference_m"];

#[derive(Deserialize)]
struct ProfileRow {
    #[allow(dead_code)]
    band: usize,
    lo: f64,
    hi: f64,
    count: u64,
    #[allow(dead_code)]
    weight: f64,
    thickness_m: f64,
    thickness_sigma_m: f64,
}

#[derive(Deserialize)]
struct HistRow {
    #[allow(dead_code)]
    bin: usize,
    lo: f64,
    hi: f64,
    count: u64,
    fraction: f64,
}

#[derive(Deserialize)]
struct SurfaceRow {
    cell_id: usize,
    r: f64,
    z: f64,
    #[allow(dead_code)]
    area: f64,
    count: u64,
    #[allow(dead_code)]
    weight: f64,
    thickness_m: f64,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, PipelineError> {
    if !path.exists() {
        return Err(PipelineError::MissingInput { path: path.to_path_buf() });
    }
    let mut r = csv::Reader::from_path(path).map_err(|e| io_error(path, e))?;
    r.deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| PipelineError::Interchange { path: path.to_path_buf(), message: e.to_string() })
}

fn write_rows<R: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<(), PipelineError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(|e| io_error(path, e))?;
    w.write_record(header).map_err(|e| io_error(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// Surface names with the given per-surface file prefix among the
/// manifest outputs, in manifest order.
fn surfaces_with(manifest: &RunManifest, prefix: &str) -> Vec<String> {
    manifest
        .outputs
        .iter()
        .filter_map(|f| f.path.strip_prefix(prefix).and_then(|s| s.strip_suffix(".csv")).map(str::to_string))
        .collect()
}

/// The wall is the only cylinder; its bands run along z.
fn axis_of(surface: &str) -> &'static str {
    if surface == "wall" {
        "z"
    } else {
        "r"
    }
}

/// Writes `plot_profiles.csv` (one row per occupied band, sorted by
/// position within each surface) and `plot_histograms.csv` (angle and
/// energy distributions, occupied bins only) into `dest`. An empty tally
/// gives header-only files.
pub fn emit_plots_data(manifest: &RunManifest, dest: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let dir = &manifest.out_dir;
    let surfaces = surfaces_with(manifest, "profile_");
    if surfaces.is_empty() {
        return Err(PipelineError::MissingInput { path: dir.join("profile_<surface>.csv") });
    }
    std::fs::create_dir_all(dest).map_err(|e| io_error(dest, e))?;

    let mut profile = Vec::new();
    for s in &surfaces {
        let mut rows: Vec<ProfileRow> = read_rows(&dir.join(format!("profile_{s}.csv")))?;
        rows.retain(|r| r.count > 0);
        rows.sort_by(|a, b| (a.lo + a.hi).total_cmp(&(b.lo + b.hi)));
        profile.extend(rows.into_iter().map(|r| {
            (s.clone(), axis_of(s), 0.5 * (r.lo + r.hi), r.lo, r.hi, r.count, r.thickness_m, r.thickness_sigma_m)
        }));
    }
    let mut hist = Vec::new();
    for s in &surfaces {
        for q in ["angle", "energy"] {
            let rows: Vec<HistRow> = read_rows(&dir.join(format!("hist_{q}_{s}.csv")))?;
            hist.extend(rows.into_iter().filter(|r| r.count > 0).map(|r| (s.clone(), q, r.lo, r.hi, r.count, r.fraction)));
        }
    }
    let p1 = dest.join("plot_profiles.csv");
    write_rows(&p1, &PLOT_PROFILE_HEADER, profile)?;
    let p2 = dest.join("plot_histograms.csv");
    write_rows(&p2, &PLOT_HIST_HEADER, hist)?;
    Ok(vec![p1, p2])
}

/// Side-by-side table of two runs keyed by `(surface, cell_id)`. Cells
/// present in only one run get empty fields for the other.
pub fn compare_runs(a: &RunManifest, b: &RunManifest, dest: &Path) -> Result<(), PipelineError> {
    type Key = (String, usize);
    let load = |m: &RunManifest| -> Result<BTreeMap<Key, SurfaceRow>, PipelineError> {
        let mut out = BTreeMap::new();
        for s in surfaces_with(m, "surface_") {
            for row in read_rows::<SurfaceRow>(&m.out_dir.join(format!("surface_{s}.csv")))? {
                out.insert((s.clone(), row.cell_id), row);
            }
        }
        Ok(out)
    };
    let (ra, rb) = (load(a)?, load(b)?);
    if ra.is_empty() && rb.is_empty() {
        return Err(PipelineError::MissingInput { path: a.out_dir.join("surface_<surface>.csv") });
    }
    let mut keys: Vec<&Key> = ra.keys().chain(rb.keys()).collect();
    keys.sort();
    keys.dedup();
    let rows = keys.into_iter().map(|k| {
        let (x, y) = (ra.get(k), rb.get(k));
        let geo = x.or(y).expect("key from one side");
        let diff = match (x, y) {
            (Some(x), Some(y)) => Some(y.thickness_m - x.thickness_m),
            _ => None,
        };
        (
            k.0.clone(),
            k.1,
            geo.r,
            geo.z,
            x.map(|r| r.count),
            y.map(|r| r.count),
            x.map(|r| r.thickness_m),
            y.map(|r| r.thickness_m),
            diff,
        )
    });
    write_rows(dest, &COMPARE_HEADER, rows)
}
