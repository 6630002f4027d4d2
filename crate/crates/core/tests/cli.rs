use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

const BIN: &str = env!("CARGO_BIN_EXE_uav-planner");

/// One GN under a short straight pass: small enough that every scheme runs
/// in seconds.
fn small_config() -> Value {
    json!({
        "scenario": {
            "gns": [[150.0, 50.0, 0.0]],
            "q_start": [0.0, 0.0, 100.0],
            "q_end": [300.0, 0.0, 100.0],
            "n_slots": 16,
            "delta_max": 2.0
        },
        "quadrature": {"u_l": 10, "u_n": 10, "u_nu": 10},
        "penalty": {"max_outer": 40},
        "validation": {"n_realizations": 2000, "seed": 5}
    })
}

fn write_config(dir: &Path, cfg: &Value) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("PLANNER_THREADS", "1").output().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small_config());
    let out = tmp.path().join("run");
    let o = run(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    for f in ["trajectory.csv", "schedule.csv", "convergence.csv", "mc_report.json", "plan.json", "summary.json"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let traj = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 1 + 17);
    assert!(traj.starts_with("slot,x,y,z,delta_s,scheduled_gn,"));

    let summary = read_json(&out.join("summary.json"));
    let t = summary["schemes"][0]["completion_time"].as_f64().unwrap();
    let plan = read_json(&out.join("plan.json"));
    let slots: f64 = plan["plan"]["slots"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).sum();
    assert_eq!(t, slots);
    assert_eq!(summary["seed"], 5);
}

#[test]
fn validate_reads_a_saved_plan() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small_config());
    let plan_dir = tmp.path().join("plan");
    assert_eq!(run(&["solve", "--config", &cfg, "--out", plan_dir.to_str().unwrap()]).status.code(), Some(0));
    let out = tmp.path().join("check");
    let o = run(&[
        "validate",
        "--config",
        &cfg,
        "--plan",
        plan_dir.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "99",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&out.join("mc_report.json"));
    assert_eq!(report["seed"], 99);
    assert_eq!(report["mean"].as_array().unwrap().len(), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("meets"));
}

#[test]
fn unreachable_endpoint_exits_infeasible() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg["scenario"]["q_end"] = json!([5000.0, 0.0, 100.0]);
    let cfg = write_config(tmp.path(), &cfg);
    let o = run(&["solve", "--config", &cfg, "--out", tmp.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible"));
}

#[test]
fn usage_and_config_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small_config());
    assert_eq!(run(&["solve", "--config", &cfg, "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--config", tmp.path().join("none.json").to_str().unwrap()]).status.code(), Some(1));
    let bad = write_config(tmp.path(), &json!({"environment": {"r_min": -1.0}}));
    let o = run(&["solve", "--config", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("r_min"));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn compare_reports_every_scheme() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small_config());
    let out = tmp.path().join("cmp");
    let o = run(&["compare", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_json(&out.join("summary.json"));
    let names: Vec<&str> = summary["schemes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["scheme"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["proposed", "ac", "fixed-slot", "fixed-alt", "fixed-traj"]);
    assert!(summary["timing"]["runtime_s"].as_f64().unwrap() >= 0.0);
    let over = std::fs::read_to_string(out.join("overestimation.csv")).unwrap();
    assert!(over.lines().count() >= 2);
    assert!(out.join("proposed").join("trajectory.csv").is_file());
}

#[test]
fn sweep_writes_one_record_per_value() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small_config());
    let out = tmp.path().join("sw");
    let o = run(&[
        "sweep",
        "--config",
        &cfg,
        "--param",
        "r_min",
        "--values",
        "1.0,2.0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let result = read_json(&out.join("sweep.json"));
    assert_eq!(result["records"].as_array().unwrap().len(), 2);
}
