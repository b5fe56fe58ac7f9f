use std::fs;
use std::process::{Command, Output};

fn gtland(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gtland")).args(args).output().unwrap()
}

fn out_dir() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

#[test]
fn run_preset_writes_the_trajectory() {
    let dir = out_dir();
    let out = gtland(&["run", "scenario1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("scenario1_gt.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,rx,ry,rz,vx,vy,vz,m,ux,uy,uz,throttle,theta_u_deg,gamma_deg,e_norm,avoid_flag"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 16);
    assert_eq!(first[1].parse::<f64>().unwrap(), -2500.0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("Landed"));
}

#[test]
fn run_scenario_file_with_overrides() {
    let dir = out_dir();
    let file = dir.path().join("s.toml");
    fs::write(&file, "name = \"mine\"\npreset = \"scenario2\"\n[guidance]\nk = 3.0\n").unwrap();
    let out = gtland(&[
        "run",
        file.to_str().unwrap(),
        "--law",
        "zemzev",
        "--dt",
        "0.02",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("mine_zemzev.csv")).unwrap();
    let second: f64 = csv.lines().nth(2).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((second - 0.02).abs() < 1e-12);
}

#[test]
fn impact_is_a_run_failure() {
    let dir = out_dir();
    let out = gtland(&["run", "scenario3", "--law", "zemzev", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(dir.path().join("scenario3_zemzev.csv").exists());
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = out_dir();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[guidance]\nc_beta = 1.2\n").unwrap();
    assert_eq!(gtland(&["run", bad.to_str().unwrap()]).status.code(), Some(2));
    fs::write(&bad, "[guidance]\nkk = 1.2\n").unwrap();
    let out = gtland(&["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("guidance.kk"));
    assert_eq!(gtland(&["run", "/nonexistent.toml"]).status.code(), Some(2));
    assert_eq!(gtland(&["run", "scenario1", "--dt", "-1"]).status.code(), Some(2));
    assert_eq!(gtland(&["sweep", "--x0", "0:-10:5"]).status.code(), Some(2));
    assert_eq!(gtland(&["montecarlo", "--n", "0"]).status.code(), Some(2));
    assert_eq!(gtland(&["sweep", "--cbeta", "0.9,1.5"]).status.code(), Some(2));
}

#[test]
fn montecarlo_writes_a_reproducible_summary() {
    let (a, b) = (out_dir(), out_dir());
    for d in [&a, &b] {
        let out = gtland(&["montecarlo", "--n", "12", "--seed", "3", "--out", d.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let sa = fs::read_to_string(a.path().join("summary.json")).unwrap();
    assert_eq!(sa, fs::read_to_string(b.path().join("summary.json")).unwrap());
    let v: serde_json::Value = serde_json::from_str(&sa).unwrap();
    assert_eq!(v["n_runs"], 12);
    assert_eq!(v["seed"], 3);
    for key in ["n_success", "fuel_kg", "worst_final_r_m", "worst_final_v_mps", "min_elevation_margin_deg", "gamma_f_deg"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let runs: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("runs.json")).unwrap()).unwrap();
    assert_eq!(runs.as_array().unwrap().len(), 12);
}

#[test]
fn montecarlo_reads_a_spec_file() {
    let dir = out_dir();
    let spec = dir.path().join("d.toml");
    fs::write(&spec, "drag = false\nc_beta = 0.9\n").unwrap();
    let out = gtland(&[
        "montecarlo",
        "--n",
        "4",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sweep_writes_the_table() {
    let dir = out_dir();
    let out = gtland(&[
        "sweep",
        "--x0",
        "-1500:-500:500",
        "--cbeta",
        "0.85,0.95",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x0_m,cbeta,dm_kg,violated");
    assert_eq!(lines.len(), 7);
}

#[test]
fn verify_subset_reports_each_criterion() {
    let out = gtland(&["verify", "--only", "2", "--only", "12"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 2);
    assert_eq!(gtland(&["verify", "--only", "99"]).status.code(), Some(2));
}
