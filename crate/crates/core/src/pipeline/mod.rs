//! Stage orchestration. Each stage reads the previous stage's interchange
//! file (ion impacts → emitted atoms → arrivals) and writes its own, so any
//! contiguous run of stages can be executed, including one starting in the
//! middle of the chain from files produced elsewhere.
//!
//! Interchange files are CSV with a JSON sidecar holding the schema
//! version, the record kind and count, and the species carried.

mod interchange;
mod plots;

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::deposition::{self, Binning, DepositionError, SurfaceMesh, SurfaceSummary};
use crate::model::{Arrival, EmittedAtom, IonImpact, ModelError, PlasmaBackend, SimConfig, Species};
use crate::plasma::{run_fluid, run_kinetic, DiagnosticRow, PlasmaError, PlasmaSetup};
use crate::sputter::{emit_atoms, kappa, EmissionModel, SputterError};
use crate::transport::{run_transport, TransportError, TransportModel, TransportStats};

pub use interchange::{read_records, write_records, RecordKind, Sidecar, INTERCHANGE_SCHEMA};
pub use plots::{compare_runs, emit_plots_data, COMPARE_HEADER, PLOT_HIST_HEADER, PLOT_PROFILE_HEADER};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const DIAGNOSTICS_FILE: &str = "plasma_diagnostics.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Plasma,
    Sputter,
    Transport,
    Deposit,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Plasma, Stage::Sputter, Stage::Transport, Stage::Deposit];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Plasma => "plasma",
            Stage::Sputter => "sputter",
            Stage::Transport => "transport",
            Stage::Deposit => "deposit",
        }
    }

    /// Interchange file this stage reads, if any.
    pub fn input(self) -> Option<RecordKind> {
        match self {
            Stage::Plasma => None,
            Stage::Sputter => Some(RecordKind::IonImpacts),
            Stage::Transport => Some(RecordKind::EmittedAtoms),
            Stage::Deposit => Some(RecordKind::Arrivals),
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Stage {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s.trim())
            .ok_or_else(|| PipelineError::Stages(format!("unknown stage '{}'", s.trim())))
    }
}

/// Parses a comma-separated stage list (`all` for every stage) and checks
/// that it is a contiguous run in pipeline order.
pub fn parse_stages(list: &str) -> Result<Vec<Stage>, PipelineError> {
    if list.trim() == "all" {
        return Ok(Stage::ALL.to_vec());
    }
    let stages: Vec<Stage> = list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<_, _>>()?;
    check_contiguous(&stages)?;
    Ok(stages)
}

pub fn check_contiguous(stages: &[Stage]) -> Result<(), PipelineError> {
    if stages.is_empty() {
        return Err(PipelineError::Stages("no stages selected".into()));
    }
    for w in stages.windows(2) {
        if w[1] as usize != w[0] as usize + 1 {
            return Err(PipelineError::Stages(format!(
                "stages must be contiguous in the order plasma, sputter, transport, deposit; got {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Numerical failure inside one stage.
#[derive(Debug, Error)]
pub enum StageFailure {
    #[error(transparent)]
    Plasma(#[from] PlasmaError),
    #[error(transparent)]
    Sputter(#[from] SputterError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Deposition(#[from] DepositionError),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(#[from] ModelError),
    #[error("stage selection: {0}")]
    Stages(String),
    #[error("{stage} stage failed: {source}")]
    Stage { stage: Stage, source: StageFailure },
    #[error("missing upstream file {}", path.display())]
    MissingInput { path: PathBuf },
    #[error("{}: interchange schema version {found}, expected {expected}", path.display())]
    Schema { path: PathBuf, found: u32, expected: u32 },
    #[error("{}: {message}", path.display())]
    Interchange { path: PathBuf, message: String },
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl PipelineError {
    fn stage(stage: Stage) -> impl FnOnce(StageFailure) -> PipelineError {
        move |source| PipelineError::Stage { stage, source }
    }

    /// The stage that failed numerically, if that is what happened.
    pub fn failed_stage(&self) -> Option<Stage> {
        match self {
            PipelineError::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}

pub(crate) fn io_error(path: &Path, e: impl fmt::Display) -> PipelineError {
    PipelineError::Io { path: path.to_path_buf(), message: e.to_string() }
}

impl From<DepositionError> for PipelineError {
    fn from(e: DepositionError) -> Self {
        match e {
            DepositionError::Io { path, message } => PipelineError::Io { path: path.into(), message },
            other => PipelineError::Stage { stage: Stage::Deposit, source: other.into() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: Stage,
    pub input_records: usize,
    pub output_records: usize,
    pub wall_clock_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Record of one run: what was asked for and every file produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub stages: Vec<Stage>,
    pub reports: Vec<StageReport>,
    pub outputs: Vec<OutputFile>,
    pub out_dir: PathBuf,
}

impl RunManifest {
    pub fn read(dir: &Path) -> Result<Self, PipelineError> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => PipelineError::MissingInput { path: path.clone() },
            _ => io_error(&path, e),
        })?;
        serde_json::from_str(&text).map_err(|e| PipelineError::Interchange { path, message: e.to_string() })
    }
}

/// SHA-256 of the canonical TOML form of `cfg`.
pub fn config_hash(cfg: &SimConfig) -> Result<String, PipelineError> {
    Ok(hex(&Sha256::digest(cfg.to_toml_string()?.as_bytes())))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn file_entry(dir: &Path, name: &str) -> Result<OutputFile, PipelineError> {
    let path = dir.join(name);
    let data = std::fs::read(&path).map_err(|e| io_error(&path, e))?;
    Ok(OutputFile { path: name.to_string(), bytes: data.len() as u64, sha256: hex(&Sha256::digest(&data)) })
}

/// Everything in `summary.json`. Deterministic: no timing, no paths.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub seed: u64,
    pub stages: Vec<Stage>,
    pub ion_impacts: Option<usize>,
    pub ion_weight: Option<f64>,
    pub emitted_atoms: Option<usize>,
    pub arrivals: Option<usize>,
    pub transport: Option<TransportStats>,
    /// emitted = absorbed + in flight + escaped
    pub particle_balance_closed: Option<bool>,
    pub surfaces: Option<Vec<SurfaceSummary>>,
}

/// Where a run reads and writes.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub stages: Vec<Stage>,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// directory holding the upstream interchange file for a mid-pipeline
    /// start; defaults to `out_dir`
    pub input_dir: Option<PathBuf>,
}

impl RunOptions {
    pub fn new(stages: Vec<Stage>, seed: u64, out_dir: impl Into<PathBuf>) -> Self {
        RunOptions { stages, seed, out_dir: out_dir.into(), input_dir: None }
    }
}

/// Upper edge (eV) of the arrival energy histograms: the configured value,
/// or the largest energy an emitted atom can carry, `κ (V + ΔV_pre)`.
pub fn energy_histogram_max(cfg: &SimConfig) -> f64 {
    cfg.deposition.energy_max.unwrap_or_else(|| {
        let k = kappa(cfg.gas.element.mass(), cfg.sputter.target.mass());
        (k * (cfg.discharge.applied_voltage + cfg.discharge.presheath_drop)).max(1.0)
    })
}

fn check_species(path: &Path, side: &Sidecar, expected: &Species) -> Result<(), PipelineError> {
    let same = side.species.name == expected.name && (side.species.mass - expected.mass).abs() <= 1e-12 * expected.mass;
    if same {
        Ok(())
    } else {
        Err(PipelineError::Interchange {
            path: path.to_path_buf(),
            message: format!("records carry {} but the configuration expects {}", side.species.name, expected.name),
        })
    }
}

/// Runs `opts.stages` against `cfg` and writes the outputs, the summary and
/// finally the manifest into `opts.out_dir`. Parallel work runs on the
/// current rayon pool; see [`with_workers`].
pub fn run_pipeline(cfg: &SimConfig, opts: &RunOptions) -> Result<RunManifest, PipelineError> {
    cfg.validate()?;
    check_contiguous(&opts.stages)?;
    let out = &opts.out_dir;
    std::fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
    let input_dir = opts.input_dir.as_deref().unwrap_or(out);
    let hash = config_hash(cfg)?;
    let mut files: Vec<String> = Vec::new();
    let mut reports = Vec::new();
    let mut summary = RunSummary { config_hash: hash.clone(), seed: opts.seed, stages: opts.stages.clone(), ..Default::default() };

    let ion = cfg.gas.element.ion();
    let atom = cfg.sputter.target.sputtered();
    let mut impacts: Option<Vec<IonImpact>> = None;
    let mut emitted: Option<Vec<EmittedAtom>> = None;
    let mut arrivals: Option<Vec<Arrival>> = None;

    // upstream file of the first stage
    let first = opts.stages[0];
    if let Some(kind) = first.input() {
        let dir = input_dir;
        match kind {
            RecordKind::IonImpacts => {
                let (recs, side) = read_records::<IonImpact>(dir, kind)?;
                check_species(&dir.join(kind.csv_name()), &side, &ion)?;
                impacts = Some(recs);
            }
            RecordKind::EmittedAtoms => {
                let (recs, side) = read_records::<EmittedAtom>(dir, kind)?;
                check_species(&dir.join(kind.csv_name()), &side, &atom)?;
                emitted = Some(recs);
            }
            RecordKind::Arrivals => {
                let (recs, side) = read_records::<Arrival>(dir, kind)?;
                check_species(&dir.join(kind.csv_name()), &side, &atom)?;
                arrivals = Some(recs);
            }
        }
    }

    for &stage in &opts.stages {
        let t0 = Instant::now();
        log::info!("stage {stage}: starting");
        let (input_records, output_records) = match stage {
            Stage::Plasma => {
                let run = || -> Result<_, PlasmaError> {
                    let setup = PlasmaSetup::from_config(cfg)?;
                    match cfg.plasma.backend {
                        PlasmaBackend::Kinetic => run_kinetic(cfg, &setup, opts.seed),
                        PlasmaBackend::Fluid => run_fluid(cfg, &setup, opts.seed),
                    }
                };
                let po = run().map_err(|e| PipelineError::stage(stage)(e.into()))?;
                write_diagnostics(&out.join(DIAGNOSTICS_FILE), &po.diagnostics)?;
                files.push(DIAGNOSTICS_FILE.into());
                files.extend(write_records(out, RecordKind::IonImpacts, &po.impacts, &ion, opts.seed)?);
                summary.ion_impacts = Some(po.impacts.len());
                summary.ion_weight = Some(po.impacts.iter().map(|i| i.weight).sum());
                let n = po.impacts.len();
                impacts = Some(po.impacts);
                (0, n)
            }
            Stage::Sputter => {
                let imp = impacts.take().expect("impacts loaded");
                let model = EmissionModel::from_config(cfg).map_err(|e| PipelineError::stage(stage)(e.into()))?;
                let atoms = emit_atoms(&model, &imp, cfg.chamber.target_z, opts.seed, cfg.sputter.samples_per_impact)
                    .map_err(|e| PipelineError::stage(stage)(e.into()))?;
                files.extend(write_records(out, RecordKind::EmittedAtoms, &atoms, &atom, opts.seed)?);
                summary.ion_impacts.get_or_insert(imp.len());
                summary.emitted_atoms = Some(atoms.len());
                let n = atoms.len();
                emitted = Some(atoms);
                (imp.len(), n)
            }
            Stage::Transport => {
                let atoms = emitted.take().expect("atoms loaded");
                let fail = |e: TransportError| PipelineError::stage(stage)(e.into());
                let model = TransportModel::from_config(cfg).map_err(fail)?;
                let mesh = SurfaceMesh::chamber(&cfg.chamber, &cfg.deposition).map_err(|e| fail(e.into()))?;
                let to = run_transport(&model, &mesh, &atoms, opts.seed).map_err(fail)?;
                files.extend(write_records(out, RecordKind::Arrivals, &to.arrivals, &atom, opts.seed)?);
                let s = &to.stats;
                summary.particle_balance_closed = Some(s.emitted == s.absorbed + s.in_flight + s.escaped);
                summary.emitted_atoms.get_or_insert(atoms.len());
                summary.arrivals = Some(to.arrivals.len());
                summary.transport = Some(to.stats.clone());
                let n = to.arrivals.len();
                arrivals = Some(to.arrivals);
                (atoms.len(), n)
            }
            Stage::Deposit => {
                let arr = arrivals.take().expect("arrivals loaded");
                let mesh = SurfaceMesh::chamber(&cfg.chamber, &cfg.deposition)?;
                let dep = &cfg.deposition;
                let bins = Binning::new(dep.energy_bins, 0.0, energy_histogram_max(cfg))?;
                let tally = deposition::deposit(&mesh, &arr, atom.mass, dep.angle_bins, bins)?;
                files.extend(deposition::write_outputs(out, &tally, &mesh, dep.atomic_volume)?);
                summary.arrivals.get_or_insert(arr.len());
                summary.surfaces = Some(deposition::surface_summaries(&tally, &mesh, dep.atomic_volume));
                (arr.len(), tally.total_count() as usize)
            }
        };
        let wall = t0.elapsed().as_secs_f64();
        log::info!("stage {stage}: {input_records} in, {output_records} out, {wall:.2} s");
        reports.push(StageReport { stage, input_records, output_records, wall_clock_s: wall });
    }

    deposition::write_json(&out.join(SUMMARY_FILE), &summary)?;
    files.push(SUMMARY_FILE.into());
    let outputs = files.iter().map(|f| file_entry(out, f)).collect::<Result<_, _>>()?;
    let manifest = RunManifest {
        config_hash: hash,
        seed: opts.seed,
        stages: opts.stages.clone(),
        reports,
        outputs,
        out_dir: out.clone(),
    };
    deposition::write_json(&out.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

fn write_diagnostics(path: &Path, rows: &[DiagnosticRow]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    let mut wrote = false;
    for r in rows {
        w.serialize(r).map_err(|e| io_error(path, e))?;
        wrote = true;
    }
    if !wrote {
        w.write_record(["step", "time", "electrons", "ions", "mean_electron_energy", "mean_ion_energy", "max_abs_phi", "iterations"])
            .map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// Runs `f` on a dedicated rayon pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, PipelineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| PipelineError::Stages(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_lists() {
        assert_eq!(parse_stages("all").unwrap(), Stage::ALL.to_vec());
        assert_eq!(parse_stages("sputter,transport").unwrap(), vec![Stage::Sputter, Stage::Transport]);
        assert!(parse_stages("plasma,transport").is_err());
        assert!(parse_stages("transport,sputter").is_err());
        assert!(parse_stages("").is_err());
        assert!(parse_stages("etch").is_err());
    }

    #[test]
    fn default_energy_edge() {
        let cfg = SimConfig::minimal();
        let k = kappa(cfg.gas.element.mass(), cfg.sputter.target.mass());
        let v = cfg.discharge.applied_voltage + cfg.discharge.presheath_drop;
        assert!((energy_histogram_max(&cfg) - k * v).abs() < 1e-12 * k * v);
    }

    #[test]
    fn config_hash_tracks_content() {
        let a = SimConfig::minimal();
        let mut b = a.clone();
        assert_eq!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
        b.gas.pressure = 2.0;
        assert_ne!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
        assert_eq!(config_hash(&a).unwrap().len(), 64);
    }
}
