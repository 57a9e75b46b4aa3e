use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gaussflow(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaussflow"))
        .args(args)
        .current_dir(dir)
        .env_remove("GAUSSFLOW_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn circle(dir: &Path) {
    let out = gaussflow(&["generate", "circle", "--r", "1", "--n", "1024", "-o", "circle.smf"], dir);
    assert!(out.status.success());
}

#[test]
fn generate_circle_writes_1024_segments() {
    let dir = tempfile::tempdir().unwrap();
    circle(dir.path());
    let text = std::fs::read_to_string(dir.path().join("circle.smf")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("smf 1 2"));
    assert_eq!(lines.next(), Some("1024 1024"));
}

#[test]
fn generate_is_deterministic_and_two_points_is_zero_dimensional() {
    let dir = tempfile::tempdir().unwrap();
    let a = gaussflow(&["generate", "bowl-cap", "--v", "1", "--rmax", "3", "--res", "64"], dir.path());
    let b = gaussflow(&["generate", "bowl-cap", "--v", "1", "--rmax", "3", "--res", "64"], dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let p = gaussflow(&["generate", "two-points", "--sep", "2"], dir.path());
    assert!(String::from_utf8_lossy(&p.stdout).starts_with("smf 0 1\n2 2\n"));
}

#[test]
fn entropy_and_mdr_of_circle() {
    let dir = tempfile::tempdir().unwrap();
    circle(dir.path());
    let e = json(&gaussflow(&["entropy", "circle.smf"], dir.path()));
    assert_eq!(e["schema_version"], 1);
    assert_eq!(e["command"], "entropy");
    assert!((e["value"].as_f64().unwrap() - 1.5203).abs() < 1e-2);
    assert_eq!(e["witness"]["kind"], "window");
    let m = json(&gaussflow(&["mdr", "circle.smf"], dir.path()));
    assert!((m["value"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-2);
}

#[test]
fn reports_are_byte_identical_for_equal_seeds() {
    let dir = tempfile::tempdir().unwrap();
    circle(dir.path());
    let a = gaussflow(&["mcd", "circle.smf", "--seed", "7"], dir.path());
    let b = gaussflow(&["mcd", "circle.smf", "--seed", "7"], dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn phi_area_of_empty_mesh_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.smf"), "smf 1 2\n0 0\n").unwrap();
    let r = json(&gaussflow(&["phi-area", "empty.smf"], dir.path()));
    assert_eq!(r["value"].as_f64(), Some(0.0));
}

#[test]
fn cone_density_takes_a_shift() {
    let dir = tempfile::tempdir().unwrap();
    circle(dir.path());
    let r = json(&gaussflow(&["cone-density", "circle.smf", "--shift", "0,0"], dir.path()));
    assert!((r["value"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert_eq!(r["witness"]["shift"], serde_json::json!([0.0, 0.0]));
}

#[test]
fn exit_codes_for_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(gaussflow(&["entropy", "missing.smf"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("bad.smf"), "smf 1 2\n1 1\n0 0\n0 5\n").unwrap();
    assert_eq!(gaussflow(&["phi-area", "bad.smf"], dir.path()).status.code(), Some(2));
    assert_eq!(gaussflow(&["generate", "circle", "--n", "2"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("c.toml"), "unknown = 1\n").unwrap();
    circle(dir.path());
    assert_eq!(gaussflow(&["phi-area", "circle.smf", "--config", "c.toml"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("t.toml"), "[tolerances]\nquad = -1.0\n").unwrap();
    assert_eq!(gaussflow(&["phi-area", "circle.smf", "--config", "t.toml"], dir.path()).status.code(), Some(2));
    assert_eq!(gaussflow(&["verify", "monotonicity"], dir.path()).status.code(), Some(2));
    let threads = Command::new(env!("CARGO_BIN_EXE_gaussflow"))
        .args(["phi-area", "circle.smf"])
        .current_dir(dir.path())
        .env("GAUSSFLOW_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn verify_translator_bound_for_grim_reaper() {
    let dir = tempfile::tempdir().unwrap();
    let r = json(&gaussflow(
        &["verify", "translator-bound", "--gen", "grim-reaper", "--v", "1", "--ycut", "2", "--res", "512"],
        dir.path(),
    ));
    assert_eq!(r["holds"], true);
    assert!((r["report"]["bound"].as_f64().unwrap() - 3.0).abs() < 1e-2);
    assert_eq!(r["report"]["convex_bound"].as_f64(), Some(3.0));
}

#[test]
fn verify_slicing_on_a_torus_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = gaussflow(&["generate", "torus", "--n", "64", "--res", "32", "-o", "torus.smf"], dir.path());
    assert!(g.status.success());
    let r = json(&gaussflow(&["verify", "slicing", "--mesh", "torus.smf"], dir.path()));
    assert_eq!(r["holds"], true);
    assert!(r["report"]["margin"].as_f64().unwrap() >= -1e-3);
}

#[test]
fn verify_sweep_bound_for_circle() {
    let dir = tempfile::tempdir().unwrap();
    let r = json(&gaussflow(&["verify", "sweep-bound", "--gen", "circle", "--a", "-1", "--v", "1"], dir.path()));
    assert_eq!(r["holds"], true);
}

#[test]
fn violated_bound_exits_with_4() {
    // Four nearly coincident sheets between two close boundary points: not
    // a translator, and its entropy (about 4) exceeds 2 + 1.
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("zigzag.smf"),
        "smf 1 2\n5 4\n0 0\n0.01 50\n0.02 0\n0.03 50\n0.04 0\n0 1\n1 2\n2 3\n3 4\n",
    )
    .unwrap();
    let out = gaussflow(&["verify", "translator-bound", "--mesh", "zigzag.smf"], dir.path());
    assert_eq!(out.status.code(), Some(4), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["holds"], false);
    assert!(r["report"]["entropy_m"].as_f64().unwrap() > 3.5);
}

#[test]
fn monotonicity_run_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "seed = 0\n[monotonicity]\na = -2.0\nb = -0.5\ndt = 8e-5\nh = 2e-2\ncsv = \"series.csv\"\n\
         initial = { grim-reaper = { v = 1.0, ycut = 2.0, res = 256 } }\n",
    )
    .unwrap();
    let r = json(&gaussflow(&["verify", "monotonicity", "--config", "run.toml"], dir.path()));
    assert_eq!(r["holds"], true);
    let csv = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# gaussflow flow series, schema 1"));
    assert_eq!(lines.next(), Some("t,phi_rescaled,swept_cumulative,margin"));
    assert!(lines.count() >= 30);
}
