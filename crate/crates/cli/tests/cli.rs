use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dkmeasure")).args(args).env_remove("DKMEASURE_THREADS").output().unwrap()
}

fn json_file(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn gen(dir: &Path, n: usize, seed: u64) -> String {
    let p = dir.join(format!("pts{n}_{seed}.json"));
    let out = dk(&["gen", "--n", &n.to_string(), "--seed", &seed.to_string(), "--output", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    p.to_str().unwrap().to_string()
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = std::fs::read_to_string(gen(dir.path(), 5, 3)).unwrap();
    let b = dk(&["gen", "--n", "5", "--seed", "3"]);
    assert_eq!(String::from_utf8(b.stdout).unwrap(), a);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["gauge"], serde_json::json!(["0", "1", "inf"]));
    assert_eq!(v["free"].as_array().unwrap().len(), 5);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(dk(&["gen", "--n", "5", "--seed", "3", "--bogus"]).status.code(), Some(2));
    assert_eq!(dk(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(dk(&["measure", "--input", "/nonexistent/pts.json"]).status.code(), Some(2));
    assert_eq!(dk(&["verify-all", "--only", "99"]).status.code(), Some(2));
    assert_eq!(dk(&["measure", "--input", "x.json", "--exclude", "1,2"]).status.code(), Some(2));
    assert_eq!(dk(&["--threads", "0", "verify-all", "--only", "2"]).status.code(), Some(2));
}

#[test]
fn delaunay_and_measure_documents() {
    let dir = tempfile::tempdir().unwrap();
    let pts = gen(dir.path(), 4, 11);
    let tri = dir.path().join("tri.json");
    assert_eq!(dk(&["delaunay", "--input", &pts, "--output", tri.to_str().unwrap()]).status.code(), Some(0));
    let t = json_file(&tri);
    // 7 vertices on the sphere: 2V − 4 faces, 3V − 6 edges
    assert_eq!(t["faces"].as_array().unwrap().len(), 10);
    assert_eq!(t["edges"].as_array().unwrap().len(), 15);

    let m = dir.path().join("m.json");
    assert_eq!(dk(&["measure", "--input", &pts, "--output", m.to_str().unwrap()]).status.code(), Some(0));
    let m = json_file(&m);
    assert_eq!(m["version"], 1);
    let d = &m["data"];
    assert!(d["det"].as_f64().unwrap() > 0.0);
    assert!(d["prepotential"].is_f64());
    assert_eq!(d["eigenvalues"].as_array().unwrap().len(), 6);
    // the gauge contains ∞, so the normalized determinant equals det here
    assert!((d["normalized_det"].as_f64().unwrap() - d["det"].as_f64().unwrap()).abs() <= 1e-12 * d["det"].as_f64().unwrap());
    let other = dk(&["measure", "--input", &pts, "--exclude", "3,4,2"]);
    let v: Value = serde_json::from_slice(&other.stdout).unwrap();
    let rel = (v["data"]["normalized_det"].as_f64().unwrap() / d["det"].as_f64().unwrap() - 1.0).abs();
    assert!(rel < 1e-9);
    let finite = dk(&["measure", "--input", &pts, "--exclude", "0,1,3"]);
    let v: Value = serde_json::from_slice(&finite.stdout).unwrap();
    assert!(v["data"]["normalized_det"].is_null());
}

#[test]
fn forms_checks_pass() {
    let dir = tempfile::tempdir().unwrap();
    let pts = gen(dir.path(), 4, 2);
    for check in ["omega", "wp", "topcoeff", "ptolemy"] {
        let out = dk(&["forms", "--input", &pts, "--check", check]);
        assert_eq!(out.status.code(), Some(0), "{check}: {}", String::from_utf8_lossy(&out.stderr));
    }
    // a generic configuration is not near any flip
    assert_eq!(dk(&["forms", "--input", &pts, "--check", "flip-discontinuity"]).status.code(), Some(1));
}

#[test]
fn regions_voronoi_and_growth() {
    let dir = tempfile::tempdir().unwrap();
    let pts = gen(dir.path(), 6, 5);
    let out = dk(&["regions", "--input", &pts, "--face", "0", "--kind", "B", "--samples", "100000", "--seed", "1"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    if out.status.code() == Some(0) {
        let d = &v["data"];
        assert!((d["closed_form"].as_f64().unwrap() - std::f64::consts::PI.powi(2) / 16.0).abs() < 1e-15);
        assert!(d["sigma_distance"].as_f64().unwrap().abs() <= 3.0);
    } else {
        // face 0 may be unbounded
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    }

    let out = dk(&["voronoi", "--input", &pts, "--lengths", "flat"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    for e in v["data"]["edges"].as_array().unwrap() {
        let th = e["theta"].as_f64().unwrap();
        assert!((e["length"].as_f64().unwrap() - 2.0 * (th / 2.0).sin()).abs() < 1e-12);
    }

    let out = dk(&["growth", "--base", &gen(dir.path(), 1, 9), "--samples", "50000", "--refined"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 2);
}

#[test]
fn volume_reports_growth_rows() {
    let out = dk(&["volume", "--N", "1", "--samples", "100000", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v["data"].as_array().unwrap();
    assert_eq!(rows[0]["volume"]["mean"], 1.0);
    assert!(rows[1]["volume"]["mean"].as_f64().unwrap() > 9.0);
    assert_eq!(dk(&["volume", "--N", "9", "--samples", "100", "--seed", "1"]).status.code(), Some(1));
}

#[test]
fn verify_all_quick_is_green_and_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let out = dk(&["--threads", "2", "verify-all", "--seed", "7", "--quick", "--output", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (ja, jb) = (json_file(&a), json_file(&b));
    let checks = ja["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 16);
    let ids: Vec<u64> = checks.iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, (1..=16).collect::<Vec<_>>());
    assert_eq!(checks[15]["status"], "REPORT-ONLY");
    for (x, y) in checks.iter().zip(jb["checks"].as_array().unwrap()) {
        assert_eq!(x["measured"], y["measured"], "check {}", x["id"]);
    }
}
