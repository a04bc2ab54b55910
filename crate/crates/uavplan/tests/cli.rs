use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use uavplan_core::planner::Phase1Plan;

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

fn uavplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uavplan")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn error_record(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(stderr.lines().last().unwrap_or("")).unwrap_or_else(|_| panic!("stderr: {stderr}"))
}

/// Copy of a bundled config directory with `edit` applied to config.json.
fn edited_config(dir: &Path, name: &str, edit: impl FnOnce(&mut Value)) -> PathBuf {
    for file in ["instance.json", "scenarios.json"] {
        std::fs::copy(data(&format!("{name}/{file}")), dir.join(file)).unwrap();
    }
    let mut cfg: Value = serde_json::from_str(&std::fs::read_to_string(data(&format!("{name}/config.json"))).unwrap()).unwrap();
    cfg.as_object_mut().unwrap().remove("ingest");
    edit(&mut cfg);
    let target = dir.join("config.json");
    std::fs::write(&target, serde_json::to_string(&cfg).unwrap()).unwrap();
    target
}

#[test]
fn plan_writes_both_plans_and_summary() {
    let out = tempfile::tempdir().unwrap();
    let run = uavplan(&["--config", path(&data("staged/config.json")), "--out", path(out.path()), "plan"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let phase1: Phase1Plan =
        serde_json::from_str(&std::fs::read_to_string(out.path().join("phase1_plan.json")).unwrap()).unwrap();
    assert_eq!(phase1.reservations, vec![vec![2; 6]]);
    assert!(phase1.optimal);
    let phase2: Value = serde_json::from_str(&std::fs::read_to_string(out.path().join("phase2_plan.json")).unwrap()).unwrap();
    assert_eq!(phase2["optimal"], Value::Bool(true));
    assert_eq!(phase2["task_plans"].as_array().unwrap().len(), 1);
    let summary = std::fs::read_to_string(out.path().join("summary.txt")).unwrap();
    assert!(summary.starts_with("optimal: true"));
    assert!(summary.contains("types=3,3,3,3,3,3"));
    assert!(out.path().join("evaluation.json").is_file());
}

#[test]
fn missing_scenario_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = edited_config(dir.path(), "staged", |c| c["scenarios"] = Value::from("absent.json"));
    let run = uavplan(&["--config", path(&cfg), "--out", path(&dir.path().join("out")), "plan"]);
    assert_eq!(run.status.code(), Some(2));
    let record = error_record(&run);
    assert_eq!(record["error"], "input");
    assert_eq!(record["exit_code"], 2);
    assert!(record["message"].as_str().unwrap().contains("absent.json"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn node_limit_one_flags_plan_non_optimal() {
    let out = tempfile::tempdir().unwrap();
    let run = uavplan(&[
        "--config",
        path(&data("staged/config.json")),
        "--out",
        path(out.path()),
        "--node-limit",
        "1",
        "plan",
    ]);
    assert_eq!(run.status.code(), Some(3));
    let summary = std::fs::read_to_string(out.path().join("summary.txt")).unwrap();
    assert!(summary.starts_with("optimal: false"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = edited_config(dir.path(), "staged", |c| c["schema_version"] = Value::from(2));
    assert_eq!(uavplan(&["--config", path(&cfg), "plan"]).status.code(), Some(2));
    let cfg = edited_config(dir.path(), "staged", |c| c["colour"] = Value::from("blue"));
    let run = uavplan(&["--config", path(&cfg), "plan"]);
    assert_eq!(run.status.code(), Some(2));
    assert!(error_record(&run)["message"].as_str().unwrap().contains("colour"));
    assert_eq!(uavplan(&["plan"]).status.code(), Some(2));
}

#[test]
fn size_prints_reservation_dimensions() {
    let run = uavplan(&["size", "--slots", "6", "--stations", "6", "--types", "3", "--weather", "10"]);
    assert_eq!(run.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "468/864");
    let run = uavplan(&["--config", path(&data("staged/config.json")), "size"]);
    assert_eq!(run.status.code(), Some(0));
    let text = String::from_utf8_lossy(&run.stdout);
    assert!(text.contains("reservation 30/48"), "{text}");
}

#[test]
fn penalty_sweep_csv_flips_reservation() {
    let out = tempfile::tempdir().unwrap();
    let run = uavplan(&["--config", path(&data("reservation/config.json")), "--out", path(out.path()), "sweep"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let mut csv = csv::Reader::from_path(out.path().join("sweep_penalty_C_p.csv")).unwrap();
    assert_eq!(csv.headers().unwrap().iter().collect::<Vec<_>>(), ["value", "objective", "optimal", "stage_costs", "summary"]);
    let rows: Vec<csv::StringRecord> = csv.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 7);
    let first_large = rows.iter().position(|r| r[4].starts_with("types=3,3,3,3,3,3")).unwrap();
    assert_eq!(&rows[first_large][0], "2");
    assert!(rows[first_large - 1][4].starts_with("types=1,1,1,1,1,1"));
}

#[test]
fn sweep_output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for out in [&a, &b] {
        let run = uavplan(&[
            "--config",
            path(&data("staged/config.json")),
            "--out",
            path(out.path()),
            "sweep",
            "--param",
            "shortfall_prob",
            "--grid",
            "0,0.5,1",
        ]);
        assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("sweep_shortfall_prob.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn sweep_usage_errors() {
    let cfg = data("staged/config.json");
    let run = uavplan(&["--config", path(&cfg), "sweep", "--param", "wind_speed"]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("wind_speed"));
    let dir = tempfile::tempdir().unwrap();
    let empty = edited_config(dir.path(), "staged", |c| c["sweep"]["grid"] = Value::Array(vec![]));
    let run = uavplan(&["--config", path(&empty), "--out", path(dir.path()), "sweep"]);
    assert_eq!(run.status.code(), Some(2));
    assert!(error_record(&run)["message"].as_str().unwrap().contains("empty"));
    let run = uavplan(&["--config", path(&cfg), "sweep", "--param", "z", "--grid", "5,4"]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn compare_csv_has_sip_minimal() {
    let out = tempfile::tempdir().unwrap();
    let run = uavplan(&["--config", path(&data("staged/config.json")), "--out", path(out.path()), "compare"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let mut csv = csv::Reader::from_path(out.path().join("compare.csv")).unwrap();
    assert_eq!(csv.headers().unwrap().iter().collect::<Vec<_>>(), ["service_fee", "sip_cost", "evf_cost", "random_cost"]);
    let rows: Vec<Vec<f64>> =
        csv.records().map(|r| r.unwrap().iter().map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 8);
    for r in rows {
        assert!(r[1] <= r[2] + 1e-9 && r[1] <= r[3] + 1e-9, "{r:?}");
    }
}

#[test]
fn compare_without_grid_is_three_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = edited_config(dir.path(), "staged", |c| {
        c["compare"] = serde_json::json!({ "seeds": 3 });
    });
    let run = uavplan(&["--config", path(&cfg), "--out", path(dir.path()), "compare"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let text = std::fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    assert!(text.starts_with("sip_cost,evf_cost,random_cost\n"));
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn ingest_demand_writes_histogram() {
    let out = tempfile::tempdir().unwrap();
    let run = uavplan(&["--config", path(&data("staged/config.json")), "--out", path(out.path()), "ingest-demand"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let hist: Value = serde_json::from_str(&std::fs::read_to_string(out.path().join("demand_hist.json")).unwrap()).unwrap();
    assert_eq!(hist["values"], serde_json::json!([240, 360, 480, 1080]));
    assert_eq!(hist["counts"], serde_json::json!([9, 6, 12, 3]));
    assert_eq!(hist["total"], 30);
    let bad = out.path().join("bad.csv");
    std::fs::write(&bad, "rows,cols\n240,240\n240,200\n").unwrap();
    let run = uavplan(&["ingest-demand", "--csv", path(&bad)]);
    assert_eq!(run.status.code(), Some(2));
    assert!(error_record(&run)["message"].as_str().unwrap().contains("line 3"));
}
