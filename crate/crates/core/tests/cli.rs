mod common;

use std::path::Path;
use std::process::{Command, Output};

fn conelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conelab")).args(args).env("CONELAB_THREADS", "2").output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn lists_every_experiment() {
    let out = conelab(&["list-experiments"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for e in conelab::scenario::Experiment::ALL {
        assert!(text.contains(e.name()), "{} missing", e.name());
    }
}

#[test]
fn bundled_scenarios_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let out = conelab(&["validate", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
        seen += 1;
    }
    assert_eq!(seen, 10);
}

#[test]
fn validate_reports_every_problem_with_its_line() {
    let dir = tempfile::tempdir().unwrap();
    for (i, (text, lines)) in common::MALFORMED.iter().enumerate() {
        let path = write(dir.path(), &format!("c{i}.ini"), text);
        let out = conelab(&["validate", &path]);
        assert_eq!(out.status.code(), Some(2), "case {i}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), lines.len(), "case {i}: {err}");
        for &l in lines.iter().filter(|&&l| l > 0) {
            assert!(err.contains(&format!("line {l}:")), "case {i} lacks line {l}: {err}");
        }
    }
}

#[test]
fn seed_override_replaces_the_seed_list() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "kg.ini", "experiment = kg_locality\n[grid]\nextent = 256\n[solver]\nseeds = 0..4\n");
    let out_dir = dir.path().join("out");
    let out = conelab(&["run", &cfg, "--seed-override", "7", "--out-dir", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["scenario"]["values"]["solver.seeds"], serde_json::json!([7]));
    let csv = std::fs::read_to_string(out_dir.join("divergence.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.starts_with("7,")));
}

#[test]
fn out_dir_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "n.ini", "experiment = nonseparability\n[output]\ndir = elsewhere\ncsv = false\n");
    let target = dir.path().join("here");
    assert!(conelab(&["run", &cfg, "--out-dir", target.to_str().unwrap()]).status.success());
    assert!(target.join("report.json").exists());
    assert!(!target.join("plot.py").exists());
}

#[test]
fn missing_file_is_a_config_error() {
    assert_eq!(conelab(&["validate", "/nonexistent/scenario.ini"]).status.code(), Some(2));
}

#[test]
fn failed_checks_exit_one_and_domain_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let fail = write(
        dir.path(),
        "f.ini",
        "experiment = kg_locality\n[grid]\nextent = 256\n[solver]\ncfl = 0.5\nseeds = 1\n[checks]\ninside_max = 1e-300\n",
    );
    let out = conelab(&["run", &fail, "--out-dir", dir.path().join("f").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));

    let dom = write(dir.path(), "d.ini", "experiment = sqrt_kg_leakage\n[solver]\ntime = 40\n");
    let out_dir = dir.path().join("d");
    assert_eq!(conelab(&["run", &dom, "--out-dir", out_dir.to_str().unwrap()]).status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert!(report["error"].is_string());
}
