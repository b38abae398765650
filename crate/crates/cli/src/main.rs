//! `sputtersim`: runs the magnetron pipeline, or any contiguous part of
//! it, and post-processes finished runs.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure
//! (the stage is named on stderr), 3 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sputtersim::model::{load_config, ModelError};
use sputtersim::pipeline::{
    compare_runs, emit_plots_data, parse_stages, run_pipeline, with_workers, PipelineError, RunManifest, RunOptions,
};

#[derive(Parser, Debug)]
#[command(name = "sputtersim", version, about = "DC planar-magnetron sputter deposition simulator")]
struct Cli {
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// master seed; overrides the configuration
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// comma-separated contiguous stages: plasma,sputter,transport,deposit (or `all`)
    #[arg(long, default_value = "all", global = true)]
    stages: String,
    /// output directory
    #[arg(long, default_value = "out", global = true)]
    out: PathBuf,
    /// directory with the upstream interchange file when starting mid-pipeline (defaults to --out)
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// worker threads; results do not depend on it
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// check the configuration and stage list, then stop
    #[arg(long, global = true)]
    validate_only: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// run the selected stages (the default)
    Run,
    /// write plot-ready CSVs for the run in --out
    Plots,
    /// join the surface tallies of two runs by cell into --out/comparison.csv
    Compare { run_a: PathBuf, run_b: PathBuf },
}

enum Failure {
    Config(String),
    Numerical { stage: String, message: String },
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Numerical { .. } => 2,
            Failure::Io(_) => 3,
        }
    }
}

fn caused_by_io(e: &(dyn std::error::Error + 'static)) -> bool {
    let mut cur = Some(e);
    while let Some(err) = cur {
        if err.downcast_ref::<std::io::Error>().is_some() {
            return true;
        }
        cur = err.source();
    }
    false
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let message = e.to_string();
        match &e {
            // a data file that cannot be read is an I/O problem wherever it surfaces
            _ if caused_by_io(&e) => Failure::Io(message),
            PipelineError::Config(_) | PipelineError::Stages(_) => Failure::Config(message),
            PipelineError::Stage { stage, .. } => Failure::Numerical { stage: stage.to_string(), message },
            PipelineError::MissingInput { .. }
            | PipelineError::Schema { .. }
            | PipelineError::Interchange { .. }
            | PipelineError::Io { .. } => Failure::Io(message),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Io { .. } => Failure::Io(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Some(Command::Plots) => {
            let manifest = RunManifest::read(&cli.out)?;
            for p in emit_plots_data(&manifest, &cli.out)? {
                println!("wrote {}", p.display());
            }
            return Ok(());
        }
        Some(Command::Compare { run_a, run_b }) => {
            let (a, b) = (RunManifest::read(run_a)?, RunManifest::read(run_b)?);
            std::fs::create_dir_all(&cli.out).map_err(|e| Failure::Io(format!("{}: {e}", cli.out.display())))?;
            let dest = cli.out.join("comparison.csv");
            compare_runs(&a, &b, &dest)?;
            println!("wrote {}", dest.display());
            return Ok(());
        }
        Some(Command::Run) | None => {}
    }

    let path = cli.config.as_deref().ok_or_else(|| Failure::Config("--config is required to run stages".into()))?;
    let cfg = load_config(path)?;
    let stages = parse_stages(&cli.stages)?;
    let seed = cli.seed.unwrap_or(cfg.seed);
    if cli.validate_only {
        let names: Vec<&str> = stages.iter().map(|s| s.name()).collect();
        println!("configuration OK: {} (stages {}, seed {seed})", path.display(), names.join(","));
        return Ok(());
    }
    let opts = RunOptions { stages, seed, out_dir: cli.out.clone(), input_dir: cli.input.clone() };
    let workers = cli.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let manifest = with_workers(workers, || run_pipeline(&cfg, &opts))??;
    report(&manifest, &cli.out);
    Ok(())
}

fn report(m: &RunManifest, out: &Path) {
    for r in &m.reports {
        println!("{:<10} {:>10} in {:>10} out {:>9.2} s", r.stage.name(), r.input_records, r.output_records, r.wall_clock_s);
    }
    println!("{} files in {} (config {})", m.outputs.len() + 1, out.display(), &m.config_hash[..12]);
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(m) => eprintln!("configuration error: {m}"),
                Failure::Numerical { stage, message } => eprintln!("numerical failure in stage {stage}: {message}"),
                Failure::Io(m) => eprintln!("I/O error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
