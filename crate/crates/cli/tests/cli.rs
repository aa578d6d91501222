use std::path::Path;
use std::process::{Command, Output};

fn elasto(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elasto")).current_dir(dir).env_remove("ELASTO_SEED").args(args).output().expect("binary runs")
}

/// `(header line, data rows)` of an output file; rows are split on commas.
fn read(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn quantity(rows: &[Vec<String>], name: &str) -> String {
    rows.iter().find(|r| r[0] == name).unwrap_or_else(|| panic!("no row {name}"))[1].clone()
}

#[test]
fn verify_passes_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = elasto(dir.path(), &["verify", "--output", "out", "--set", "verify.random_draws=5", "--set", "verify.korn_draws=5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read(&dir.path().join("out/verify.csv"));
    assert!(header.starts_with("# config: {"));
    assert_eq!(rows[0], ["check_name", "lhs", "rhs", "holds"]);
    assert!(rows.len() > 50);
    assert!(rows[1..].iter().all(|r| r[3] == "true"));
}

#[test]
fn zero_incident_gives_zero_density() {
    let dir = tempfile::tempdir().unwrap();
    let out = elasto(dir.path(), &["solve", "--output", "out", "--set", "incident.amplitude=0", "--set", "discretization.n=32"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = read(&dir.path().join("out/solve.csv"));
    assert_eq!(quantity(&rows, "density_max").parse::<f64>().unwrap(), 0.0);
    assert_eq!(quantity(&rows, "n"), "32");
}

#[test]
fn single_amplitude_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = elasto(dir.path(), &["sweep", "--output", "out", "--set", "sweep.amplitudes=[0]", "--set", "discretization.n=32"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = read(&dir.path().join("out/sweep.csv"));
    assert_eq!(rows.len(), 2);
    let col = rows[0].iter().position(|c| c == "d_tilde").unwrap();
    assert_eq!(rows[1][col].parse::<f64>().unwrap(), 0.0);
    let (_, fit) = read(&dir.path().join("out/fit.csv"));
    assert!(fit.iter().any(|r| r[0] == "fit_error"));
}

#[test]
fn invalid_config_exits_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = elasto(dir.path(), &["solve", "--set", "medium.nu=0.3"]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "config");
    assert!(err["message"].as_str().unwrap().contains("nu"));

    let out = elasto(dir.path(), &["solve", "--set", "discretization.n=7"]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(err["field"], "discretization.n");

    let out = elasto(dir.path(), &["solve", "--set", "medium.mu=-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("elasto-out").exists());
}

#[test]
fn rerun_from_echoed_config_is_bit_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "farfield",
        "--output",
        "out",
        "--set",
        "discretization.n=48",
        "--set",
        "incident.kind=transversal",
        "--set",
        "incident.angle=0.7",
    ];
    assert!(elasto(a.path(), &args).status.success());
    let first = a.path().join("out/farfield.csv");
    let cfg = first.to_str().unwrap();
    let out = elasto(b.path(), &["farfield", "--config", cfg, "--output", "out"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let x = std::fs::read(&first).unwrap();
    let y = std::fs::read(b.path().join("out/farfield.csv")).unwrap();
    assert!(x == y, "outputs differ");
}

#[test]
fn seed_variable_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_elasto"))
        .current_dir(dir.path())
        .env("ELASTO_SEED", "123")
        .args(["sweep", "--output", "out", "--set", "seed=5", "--set", "sweep.amplitudes=[0]", "--set", "discretization.n=32"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read(&dir.path().join("out/sweep.csv"));
    assert!(header.contains("\"seed\":123"));
    assert_eq!(rows[1].last().unwrap(), "123");

    let out = Command::new(env!("CARGO_BIN_EXE_elasto")).current_dir(dir.path()).env("ELASTO_SEED", "x").arg("solve").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
