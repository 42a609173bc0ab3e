//! End-to-end runs of the `chirp-ladder` binary.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chirp_ladder_cli::RunConfig;
use serde_json::Value;

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn config(name: &str) -> PathBuf {
    configs_dir().join(name)
}

fn cli(subcommand: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chirp-ladder"))
        .arg(subcommand)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Every file in `dir`, sorted by name, with its bytes.
fn snapshot_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn shipped_configs_round_trip() {
    let mut seen = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let config = RunConfig::load(&path, &[]).unwrap();
            let again = RunConfig::from_toml_str(&config.to_toml_string(), &[]).unwrap();
            assert_eq!(config, again, "{}", path.display());
            seen += 1;
        }
    }
    assert!(seen >= 6);
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let short = [
        "--override",
        "integrator.tau_end=2.0",
        "--override",
        "basis.size=20",
        "--override",
        "integrator.snapshot_taus=[-6.0]",
    ];
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let run = cli("simulate", &config("ladder_subharmonic.toml"), out, &short);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    }
    let files = snapshot_dir(&a);
    let names: Vec<&str> = files.iter().map(|f| f.0.as_str()).collect();
    assert_eq!(names, ["amplitudes_final.csv", "amplitudes_tau_m6.csv", "summary.json", "trajectory.csv"]);
    assert_eq!(files, snapshot_dir(&b));
}

#[test]
fn classical_sweep_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cols = ["--override", "classical.p2=[0.1, 0.3]"];
    let mut outputs = Vec::new();
    for threads in ["1", "2"] {
        let out = dir.path().join(threads);
        let mut args = cols.to_vec();
        args.extend(["--threads", threads]);
        let run = cli("classical", &config("autoresonance_subharmonic.toml"), &out, &args);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
        outputs.push(snapshot_dir(&out));
    }
    assert_eq!(outputs[0], outputs[1]);
    let table =
        String::from_utf8(outputs[0].iter().find(|f| f.0 == "classical_threshold.csv").unwrap().1.clone()).unwrap();
    assert_eq!(table.lines().next().unwrap(), "P2,P1_tilde_cr,theory_classical,theory_quantum,regime");
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn undriven_run_captures_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let run = cli("simulate", &config("ground_state.toml"), dir.path(), &[]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let summary = json(&dir.path().join("summary.json"));
    assert_eq!(summary["capture_probability"].as_f64(), Some(0.0));
    assert_eq!(summary["P1_tilde"].as_f64(), Some(0.0));
    assert!(summary["max_norm_drift"].as_f64().unwrap() < 1e-10);
}

#[test]
fn ground_state_wigner_peaks_at_one_over_pi() {
    let dir = tempfile::tempdir().unwrap();
    let run = cli("wigner", &config("ground_state.toml"), dir.path(), &[]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let meta = json(&dir.path().join("wigner.json"));
    assert!((meta["max"].as_f64().unwrap() - 1.0 / PI).abs() < 1e-8);
    assert!((meta["purity"].as_f64().unwrap() - 1.0).abs() < 2e-2);
    let csv = fs::read_to_string(dir.path().join("wigner.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 65);
    assert!(rows.iter().all(|r| r.split(',').count() == 65));
}

#[test]
fn small_basis_hits_the_truncation_guard() {
    let dir = tempfile::tempdir().unwrap();
    let run = cli("simulate", &config("ladder_subharmonic.toml"), dir.path(), &["--override", "basis.size=5"]);
    assert_eq!(run.status.code(), Some(3), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stderr).contains("truncat"));
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let ladder = config("ladder_subharmonic.toml");
    let cases: [(&str, &[&str]); 5] = [
        ("threshold", &["--override", "threshold.p2=[]"]),
        ("simulate", &["--override", "params.alpha=-1.0"]),
        ("simulate", &["--override", "basis.sise=3"]),
        ("simulate", &["--override", "params.epsilon"]),
        ("threshold", &["--threads", "0", "--override", "threshold.p2=[10.0]"]),
    ];
    for (sub, args) in cases {
        let run = cli(sub, &ladder, dir.path(), args);
        assert_eq!(run.status.code(), Some(2), "{sub} {args:?}: {}", String::from_utf8_lossy(&run.stderr));
    }
    let missing = cli("simulate", &dir.path().join("absent.toml"), dir.path(), &[]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn isomorphism_rejects_fundamental_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = cli("isomorphism", &config("ladder_effective.toml"), dir.path(), &[]);
    assert_eq!(run.status.code(), Some(2));
}
