use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dirac2b(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirac2b"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn constants_report_has_version_config_and_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let out = dirac2b(dir.path(), &["constants", "--kappa", "1", "--gamma", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&dir.path().join("dirac2b-report.json"));
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["artifact"]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["config"]["kappa"], 1.0);
    assert_eq!(r["config"]["out"], "./dirac2b-report.json");
    assert!((r["coupling"]["m_kappa"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(r["coupling"]["admissible"], true);
}

#[test]
fn inadmissible_coupling_exits_2_with_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let out = dirac2b(dir.path(), &["spectrum", "--gamma", "0.7", "--kappa", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("2/pi"), "{err}");
    assert!(!dir.path().join("dirac2b-report.json").exists());
}

#[test]
fn dense_request_over_cap_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dirac2b(dir.path(), &["spectrum", "--n", "16", "--box", "16"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("size cap"));
}

#[test]
fn clifford_suite_passes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for _ in 0..2 {
        let out = dirac2b(dir.path(), &["verify", "--suite", "clifford", "--seed", "3", "--out", "a.json"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
        runs.push(std::fs::read(dir.path().join("a.json")).unwrap());
    }
    assert!(runs[0] == runs[1], "reports differ");
    let r = json(&dir.path().join("a.json"));
    assert_eq!(r["passed"], true);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["name"].as_str().unwrap().starts_with("clifford.")));
}

#[test]
fn csv_output_is_flat_key_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dirac2b(dir.path(), &["constants", "--format", "csv", "--out", "c.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("key,value"));
    assert!(text.lines().any(|l| l.starts_with("coupling.gamma_threshold,0.636619772")));
    assert!(text.lines().any(|l| l == "schema_version,1"));
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.conf"), "# constants run\nkappa = 0.5\nout = from-file.json\n").unwrap();
    let out = dirac2b(dir.path(), &["constants", "--config", "run.conf", "--out", "flag.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!dir.path().join("from-file.json").exists());
    assert_eq!(json(&dir.path().join("flag.json"))["config"]["kappa"], 0.5);

    std::fs::write(dir.path().join("bad.conf"), "kappa = 1\nshape = round\n").unwrap();
    let out = dirac2b(dir.path(), &["constants", "--config", "bad.conf"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("shape"));
}

#[test]
fn usage_errors_and_help() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(dirac2b(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(dirac2b(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(dirac2b(dir.path(), &["verify", "--suite", "nope"]).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_dirac2b"))
        .current_dir(dir.path())
        .env("DIRAC2B_THREADS", "zero")
        .args(["constants"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectrum_fiber_and_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_dirac2b"))
        .current_dir(dir.path())
        .env("DIRAC2B_THREADS", "1")
        .args(["spectrum", "--gamma", "0.3", "--kappa", "1", "--n", "4", "--box", "8"])
        .args(["--pvec", "0.5,0,-0.25", "--m1", "1", "--m2", "1", "--snapshot", "psi", "--out", "s.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = json(&dir.path().join("s.json"));
    assert_eq!(r["results"]["operator"], "fiber");
    assert_eq!(r["results"]["eigenvalues"].as_array().unwrap().len(), 1024);
    assert!(r["results"]["schur_norm"].as_f64().unwrap() < 1.0);
    assert_eq!(r["coupling"]["gamma"], 0.3);
    let bytes = std::fs::metadata(dir.path().join("psi.bin")).unwrap().len();
    assert_eq!(bytes, 24 + 1024 * 16);
    assert!(dir.path().join("psi.json").exists());
}

#[test]
fn triangle_counterexample_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dirac2b(dir.path(), &["counterexample", "--which", "triangle", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&dir.path().join("dirac2b-report.json"));
    assert!(r["results"]["triangle"].is_object());
    assert!(r["results"].get("okaji").is_none());
}
