use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

/// The example configuration, shortened, with absolute data paths.
fn write_config(dir: &Path, edit: impl Fn(String) -> String) -> PathBuf {
    let text = std::fs::read_to_string(repo().join("configs/magnetron.toml")).unwrap();
    let data = repo().join("data");
    let text = text
        .replace("\"../data", &format!("\"{}", data.display()))
        .replace("steps = 2000", "steps = 100")
        .replace("samples_per_impact = 200", "samples_per_impact = 5");
    let path = dir.join("run.toml");
    std::fs::write(&path, edit(text)).unwrap();
    path
}

fn sputtersim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sputtersim")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn full_run_then_plots_and_compare() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), |t| t);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (dir, seed) in [(&a, "1"), (&b, "2")] {
        let o = sputtersim(&["--config", s(&cfg), "--seed", seed, "--out", s(dir), "--workers", "2"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let stdout = String::from_utf8_lossy(&o.stdout);
        for stage in ["plasma", "sputter", "transport", "deposit"] {
            assert!(stdout.contains(stage), "{stdout}");
        }
        assert!(dir.join("manifest.json").exists());
    }
    let o = sputtersim(&["plots", "--out", s(&a)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(a.join("plot_profiles.csv").exists() && a.join("plot_histograms.csv").exists());

    let cmp = tmp.path().join("cmp");
    let o = sputtersim(&["compare", s(&a), s(&b), "--out", s(&cmp)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(cmp.join("comparison.csv")).unwrap();
    assert!(text.starts_with("surface,cell_id,r,z,count_a,count_b"));
}

#[test]
fn mid_pipeline_start_reads_the_input_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), |t| t);
    let up = tmp.path().join("up");
    let o = sputtersim(&["--config", s(&cfg), "--stages", "plasma,sputter", "--out", s(&up)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let down = tmp.path().join("down");
    let o = sputtersim(&["--config", s(&cfg), "--stages", "transport,deposit", "--input", s(&up), "--out", s(&down)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(down.join("arrivals.csv").exists());
    assert!(!down.join("ion_impacts.csv").exists());
}

#[test]
fn validate_only_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), |t| t);
    let out = tmp.path().join("out");
    let o = sputtersim(&["--config", s(&cfg), "--validate-only", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn configuration_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), |t| t);
    let o = sputtersim(&["--config", s(&cfg), "--stages", "plasma,transport", "--validate-only"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));

    let bad = write_config(tmp.path(), |t| t.replace("applied_voltage = 300.0", "applied_voltage = -5.0"));
    let o = sputtersim(&["--config", s(&bad), "--validate-only"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));

    let unknown = write_config(tmp.path(), |t| t.replace("[gas]", "[gas]\nhumidity = 0.3"));
    let o = sputtersim(&["--config", s(&unknown), "--validate-only"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
}

#[test]
fn numerical_failures_exit_with_two_and_name_the_stage() {
    let tmp = tempfile::tempdir().unwrap();
    // a step far too long to resolve the electron gyration
    let cfg = write_config(tmp.path(), |t| t.replace("steps = 100", "steps = 100\ndt = 1e-9"));
    let o = sputtersim(&["--config", s(&cfg), "--out", s(&tmp.path().join("out"))]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("numerical failure in stage plasma"), "{}", stderr(&o));
}

#[test]
fn io_errors_exit_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sputtersim(&["--config", s(&tmp.path().join("nope.toml")), "--validate-only"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));

    let cfg = write_config(tmp.path(), |t| t);
    let o = sputtersim(&["--config", s(&cfg), "--stages", "deposit", "--out", s(&tmp.path().join("empty"))]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("arrivals"), "{}", stderr(&o));

    let o = sputtersim(&["plots", "--out", s(&tmp.path().join("no_run"))]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));

    let missing_table = write_config(tmp.path(), |t| t.replace("ar_cu_yield.csv", "missing_yield.csv"));
    let o = sputtersim(&["--config", s(&missing_table), "--out", s(&tmp.path().join("out"))]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}
