use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{io_error, PipelineError};
use crate::model::Species;

pub const INTERCHANGE_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecordKind {
    IonImpacts,
    EmittedAtoms,
    Arrivals,
}

impl RecordKind {
    pub fn stem(self) -> &'static str {
        match self {
            RecordKind::IonImpacts => "ion_impacts",
            RecordKind::EmittedAtoms => "emitted_atoms",
            RecordKind::Arrivals => "arrivals",
        }
    }

    pub fn csv_name(self) -> String {
        format!("{}.csv", self.stem())
    }

    pub fn sidecar_name(self) -> String {
        format!("{}.meta.json", self.stem())
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            RecordKind::IonImpacts => &["x", "y", "z", "energy", "angle", "weight"],
            RecordKind::EmittedAtoms => &["x", "y", "z", "vx", "vy", "vz", "weight"],
            RecordKind::Arrivals => {
                &["atom", "surface", "cell", "x", "y", "z", "vx", "vy", "vz", "weight", "collisions", "thermalized"]
            }
        }
    }

    pub fn units(self) -> &'static str {
        match self {
            RecordKind::IonImpacts => "positions m, energy eV, angle rad from the target normal",
            RecordKind::EmittedAtoms | RecordKind::Arrivals => "positions m, velocities m/s",
        }
    }
}

/// Metadata written next to every interchange CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub schema_version: u32,
    pub kind: RecordKind,
    pub records: usize,
    pub columns: Vec<String>,
    pub units: String,
    pub species: Species,
    /// master seed of the run that wrote the file
    pub seed: u64,
}

/// Writes `records` as `<kind>.csv` plus its sidecar into `dir` and returns
/// both file names.
pub fn write_records<T: Serialize>(
    dir: &Path,
    kind: RecordKind,
    records: &[T],
    species: &Species,
    seed: u64,
) -> Result<Vec<String>, PipelineError> {
    let csv_path = dir.join(kind.csv_name());
    // floats go through the shortest round-trip representation, so reading
    // the file back reproduces every value bit for bit
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(&csv_path).map_err(|e| io_error(&csv_path, e))?;
    w.write_record(kind.columns()).map_err(|e| io_error(&csv_path, e))?;
    for r in records {
        w.serialize(r).map_err(|e| io_error(&csv_path, e))?;
    }
    w.flush().map_err(|e| io_error(&csv_path, e))?;
    let side = Sidecar {
        schema_version: INTERCHANGE_SCHEMA,
        kind,
        records: records.len(),
        columns: kind.columns().iter().map(|s| s.to_string()).collect(),
        units: kind.units().into(),
        species: species.clone(),
        seed,
    };
    crate::deposition::write_json(&dir.join(kind.sidecar_name()), &side)?;
    Ok(vec![kind.csv_name(), kind.sidecar_name()])
}

/// Reads `<kind>.csv` and its sidecar from `dir`, checking the schema
/// version, the column header and the record count.
pub fn read_records<T: DeserializeOwned>(dir: &Path, kind: RecordKind) -> Result<(Vec<T>, Sidecar), PipelineError> {
    let side_path = dir.join(kind.sidecar_name());
    let csv_path = dir.join(kind.csv_name());
    for p in [&csv_path, &side_path] {
        if !p.exists() {
            return Err(PipelineError::MissingInput { path: p.clone() });
        }
    }
    let text = std::fs::read_to_string(&side_path).map_err(|e| io_error(&side_path, e))?;
    let raw: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| PipelineError::Interchange { path: side_path.clone(), message: e.to_string() })?;
    // version first, so a future layout is reported as such rather than as a parse error
    let found = raw.get("schema_version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if found != INTERCHANGE_SCHEMA {
        return Err(PipelineError::Schema { path: side_path, found, expected: INTERCHANGE_SCHEMA });
    }
    let side: Sidecar =
        serde_json::from_value(raw).map_err(|e| PipelineError::Interchange { path: side_path.clone(), message: e.to_string() })?;
    let bad = |message: String| PipelineError::Interchange { path: csv_path.clone(), message };
    if side.kind != kind {
        return Err(bad(format!("sidecar describes {:?}, expected {:?}", side.kind, kind)));
    }
    let mut r = csv::Reader::from_path(&csv_path).map_err(|e| io_error(&csv_path, e))?;
    let header: Vec<String> = r.headers().map_err(|e| bad(e.to_string()))?.iter().map(str::to_string).collect();
    if header != kind.columns() {
        return Err(bad(format!("header {header:?} does not match {:?}", kind.columns())));
    }
    let records: Vec<T> = r.deserialize().collect::<Result<_, _>>().map_err(|e| bad(e.to_string()))?;
    if records.len() != side.records {
        return Err(bad(format!("{} records, sidecar says {}", records.len(), side.records)));
    }
    Ok((records, side))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::IonImpact;

    #[test]
    fn schema_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let recs = [IonImpact { x: 0.1, y: 0.0, z: 0.0, energy: 300.0, angle: 0.0, weight: 1.0 }];
        write_records(dir.path(), RecordKind::IonImpacts, &recs, &Species::ion("Ar", 39.948, 18), 1).unwrap();
        let p = dir.path().join(RecordKind::IonImpacts.sidecar_name());
        let text = std::fs::read_to_string(&p).unwrap().replace("\"schema_version\": 1", "\"schema_version\": 7");
        std::fs::write(&p, text).unwrap();
        match read_records::<IonImpact>(dir.path(), RecordKind::IonImpacts) {
            Err(PipelineError::Schema { found: 7, expected: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_file() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            read_records::<IonImpact>(dir.path(), RecordKind::IonImpacts),
            Err(PipelineError::MissingInput { .. })
        ));
    }
}
