//! End-to-end tests of the `msis` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn msis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msis"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scenario(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

fn ok_stdout(args: &[&str]) -> String {
    let out = msis(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn crb_has_one_row_per_grid_point() {
    let dir = TempDir::new().unwrap();
    let s = scenario(dir.path(), "s.json", r#"{"system": {}}"#);
    let text = ok_stdout(&["crb", "--scenario", &s]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 361);
    assert!(lines[0].starts_with("theta_rad,crb_exact_rad2,crb_approx_rad2,gamma"));
    for l in &lines[1..] {
        assert_eq!(l.split(',').count(), 8);
    }
}

#[test]
fn two_sector_blind_spot_prints_inf() {
    let dir = TempDir::new().unwrap();
    let s = scenario(
        dir.path(),
        "s.json",
        r#"{"system": {"sectors": 2, "elements_per_sector": 12, "pattern": "isotropic"}, "theta_grid": {"points": 4}}"#,
    );
    let text = ok_stdout(&["crb", "--scenario", &s]);
    // Nodes 0, π/2, π, 3π/2; the boresights are 0 and π, the endfire directions π/2 and 3π/2.
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[1][1], "inf");
    assert_eq!(rows[3][1], "inf");
    assert!(rows[0][1].parse::<f64>().unwrap().is_finite());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let s = scenario(
        dir.path(),
        "s.json",
        r#"{"system": {}, "theta_grid": {"points": 6}, "monte_carlo": {"trials": 4, "seed": 11, "estimator_grid": 512}}"#,
    );
    for cmd in ["crb", "mse", "codebook"] {
        assert_eq!(ok_stdout(&[cmd, "--scenario", &s]), ok_stdout(&[cmd, "--scenario", &s]));
    }
    let a = ok_stdout(&["mse", "--scenario", &s, "--seed", "12"]);
    assert_ne!(a, ok_stdout(&["mse", "--scenario", &s]));
}

#[test]
fn codebook_has_sixty_four_rows() {
    let dir = TempDir::new().unwrap();
    let s = scenario(
        dir.path(),
        "s.json",
        r#"{"system": {"sectors": 2, "elements_per_sector": 4, "snapshots": 8}}"#,
    );
    let text = ok_stdout(&["codebook", "--scenario", &s]);
    assert_eq!(text.lines().next().unwrap(), "snapshot,sector,element,real,imag");
    assert_eq!(text.lines().count(), 65);
}

#[test]
fn scaling_reports_cubic_angle_rate() {
    let dir = TempDir::new().unwrap();
    let s = scenario(
        dir.path(),
        "s.json",
        r#"{"system": {}, "scaling": {"n_values": [16, 24, 32, 48, 64], "sectors": [4], "patterns": ["isotropic", "directive"]}}"#,
    );
    let text = ok_stdout(&["scaling", "--scenario", &s]);
    let rows: Vec<Vec<String>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    assert_eq!(rows.len(), 10);
    for r in &rows {
        let slope: f64 = r[6].parse().unwrap();
        assert!((slope - 3.0).abs() < 0.1, "{r:?}");
    }
}

#[test]
fn observe_then_estimate_round_trip() {
    let dir = TempDir::new().unwrap();
    let s = scenario(dir.path(), "s.json", r#"{"system": {"p_tr_dbm": 60.0}}"#);
    let obs = dir.path().join("y.csv");
    let obs_s = obs.to_str().unwrap();
    ok_stdout(&[
        "observe",
        "--scenario",
        &s,
        "--theta",
        "2.0",
        "--seed",
        "5",
        "--out",
        obs_s,
    ]);
    let again = ok_stdout(&["observe", "--scenario", &s, "--theta", "2.0", "--seed", "5"]);
    assert_eq!(fs::read_to_string(&obs).unwrap(), again);
    let doc: serde_json::Value =
        serde_json::from_str(&ok_stdout(&["estimate", "--scenario", &s, "--observation", obs_s])).unwrap();
    assert_eq!(doc["status"], "ok");
    assert!((doc["theta_hat_rad"].as_f64().unwrap() - 2.0).abs() < 1e-3);
}

#[test]
fn all_zero_observation_reports_failure_in_json() {
    let dir = TempDir::new().unwrap();
    let s = scenario(dir.path(), "s.json", r#"{"system": {}}"#);
    let mut csv = String::from("index,real,imag\n");
    for i in 0..576 {
        csv.push_str(&format!("{i},0,0\n"));
    }
    let obs = scenario(dir.path(), "y.csv", &csv);
    let doc: serde_json::Value =
        serde_json::from_str(&ok_stdout(&["estimate", "--scenario", &s, "--observation", &obs])).unwrap();
    assert_eq!(doc["status"], "failed");
}

#[test]
fn sweep_rows_follow_block() {
    let dir = TempDir::new().unwrap();
    let s = scenario(
        dir.path(),
        "s.json",
        r#"{"system": {"elements_per_sector": 15, "snapshots": 60, "p_tr_dbm": 30.0},
            "theta_grid": {"points": 36},
            "sweep": {"kind": "sectors", "sectors": [2, 3, 4, 5, 6]}}"#,
    );
    let text = ok_stdout(&["sweep", "--scenario", &s]);
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(msis(&["crb"]).status.code(), Some(2));
    assert_eq!(msis(&["crb", "--scenario", "/nonexistent.json"]).status.code(), Some(2));
    let bad = scenario(dir.path(), "bad.json", r#"{"system": {"sectors": 4, "unknown": 1}}"#);
    assert_eq!(msis(&["crb", "--scenario", &bad]).status.code(), Some(2));
    let no_mc = scenario(dir.path(), "s.json", r#"{"system": {}}"#);
    assert_eq!(msis(&["mse", "--scenario", &no_mc]).status.code(), Some(2));
    let short = scenario(dir.path(), "y.csv", "index,real,imag\n0,1,0\n");
    assert_eq!(
        msis(&["estimate", "--scenario", &no_mc, "--observation", &short])
            .status
            .code(),
        Some(2)
    );
}
