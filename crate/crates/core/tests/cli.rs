use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn ncerg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncerg")).args(args).output().unwrap()
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(name: &str, out: &Path, extra: &[&str]) -> Output {
    let path = scenario(name);
    let mut args = vec!["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    ncerg(&args)
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn converge_writes_csv_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("converge_heat8.json", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("converge.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,norm_value"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[0][0], 0.5);
    let rep = read_json(&dir.path().join("converge.json"));
    assert_eq!(rep["schema"], "ncerg.report/1");
    assert_eq!(rep["seed"], 7);
    assert_eq!(rep["scenario_hash"].as_str().unwrap().len(), 64);
    assert!(rep["tolerances"]["ds_tol"].is_number());
    assert!(rep["result"]["final_ratio"].as_f64().unwrap() <= 0.05);
    // CSV values round-trip exactly to the report values
    for (row, v) in rows.iter().zip(rep["result"]["values"].as_array().unwrap()) {
        assert_eq!(row[1], v.as_f64().unwrap());
    }
}

#[test]
fn ds_verify_verdict_is_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("ds_verify_doubling.json", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let rep = read_json(&dir.path().join("report.json"));
    assert_eq!(rep["result"]["verdict"], false);
    assert_eq!(rep["result"]["subunital"], false);
}

#[test]
fn violated_bound_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("bounds_violated.json", dir.path(), &[]).status.code(), Some(2));
    assert_eq!(run("bounds_schur.json", dir.path(), &[]).status.code(), Some(0));
}

#[test]
fn shipped_scenarios_run() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["maximal_shift.json", "norm_lorentz.json"] {
        let out = run(name, dir.path(), &[]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let rep = read_json(&dir.path().join("report.json"));
    assert!(rep["result"]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn validation_errors_exit_one_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        "{\n  \"schema\": \"ncerg.scenario/1\",\n  \"experiment\": {\"type\": \"mu\"},\n  \"extra\": true\n}\n",
    )
    .unwrap();
    let out = ncerg(&["run", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");
    let missing = ncerg(&["run", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn seed_and_thread_count_do_not_change_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for (i, threads) in ["1", "4"].iter().enumerate() {
        let out_dir = dir.path().join(i.to_string());
        let out = Command::new(env!("CARGO_BIN_EXE_ncerg"))
            .env("NCERG_THREADS", threads)
            .args(["run", scenario("converge_heat8.json").to_str().unwrap(), "--out"])
            .arg(&out_dir)
            .args(["--seed", "99"])
            .output()
            .unwrap();
        assert!(out.status.success());
        reports.push(std::fs::read(out_dir.join("converge.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(serde_json::from_slice::<Value>(&reports[0]).unwrap()["seed"], 99);
}

#[test]
fn direct_subcommands() {
    let out = ncerg(&["mu", "--shape", "[[2,1.0],[1,0.5]]", "--diag", "3,-1,2", "--t", "0,1.2,2.6"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let samples: Vec<f64> = v["result"]["samples"].as_array().unwrap().iter().map(|p| p[1].as_f64().unwrap()).collect();
    assert_eq!(samples, vec![3.0, 2.0, 0.0]);

    let out = ncerg(&["norm", "--shape", "[[2,1.0],[1,0.5]]", "--diag", "3,-1,2", "--norm", "lp:inf"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["value"], 3.0);

    let family = r#"{"family":"heat_cycle","n":2}"#;
    let phi1 = ncerg(&["average", "--family", family, "--diag", "1,-1", "--t", "1"]);
    let quad = ncerg(&["average", "--family", family, "--diag", "1,-1", "--t", "1", "--method", "quad", "--order", "16"]);
    let a: Value = serde_json::from_slice(&phi1.stdout).unwrap();
    let b: Value = serde_json::from_slice(&quad.stdout).unwrap();
    let fa = a["result"]["value"][0][0][0][0].as_f64().unwrap();
    let fb = b["result"]["value"][0][0][0][0].as_f64().unwrap();
    let want = (1.0 - (-2.0f64).exp()) / 2.0;
    assert!((fa - want).abs() < 1e-12 && (fb - want).abs() < 1e-12);

    let out = ncerg(&["norm", "--shape", "[[1,1.0]]", "--norm", "lp:2"]);
    assert_eq!(out.status.code(), Some(1));
}
