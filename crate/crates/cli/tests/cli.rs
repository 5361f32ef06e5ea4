use std::path::Path;
use std::process::{Command, Output};

fn radsched(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radsched")).args(args).current_dir(dir).env("RUST_LOG", "warn").output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) {
    let out = radsched(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_reports_status_objective_and_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--days", "20", "--seed", "4", "--out", "inst"]);
    ok(d, &["solve", "--instance", "inst/instance_000004.json", "--node-limit", "5000", "--out", "sol.json"]);
    let sol = json(&d.join("sol.json"));
    assert!(["optimal", "feasible"].contains(&sol["status"].as_str().unwrap()));
    assert!(sol["objective"].as_f64().unwrap() >= sol["curative_objective"].as_f64().unwrap());
    assert!(sol["stats"]["nodes"].as_u64().unwrap() > 0);
    let instance = json(&d.join("inst/instance_000004.json"));
    let patients: usize =
        instance["flow"]["arrivals"].as_array().unwrap().iter().map(|d| d.as_array().unwrap().len()).sum();
    assert_eq!(sol["assignment"]["assignments"].as_object().unwrap().len(), patients);
}

#[test]
fn prediction_based_without_a_model_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--days", "10", "--out", "inst"]);
    let out = radsched(
        d,
        &["run", "--instance", "inst/instance_000000.json", "--strategy", "prediction-based", "--out", "r.json"],
    );
    assert!(!out.status.success());
    let out = radsched(d, &["sim", "--instances", "inst", "--strategies", "prediction-based", "--out", "sim"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--model"));
}

#[test]
fn unknown_strategy_and_preset_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(!radsched(d, &["run", "--instance", "x.json", "--strategy", "fastest", "--out", "r.json"])
        .status
        .success());
    assert!(!radsched(d, &["gen", "--preset", "nowhere", "--out", "inst"]).status.success());
}

#[test]
fn explain_waterfall_ends_at_the_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--days", "40", "--count", "2", "--out", "inst"]);
    std::fs::create_dir(d.join("sol")).unwrap();
    for f in ["instance_000000.json", "instance_000001.json"] {
        ok(d, &["solve", "--instance", &format!("inst/{f}"), "--out", &format!("sol/{f}")]);
    }
    ok(d, &["extract", "--instances", "inst", "--solutions", "sol", "--out", "ex.csv"]);
    ok(d, &["train", "--examples", "ex.csv", "--trees", "20", "--out", "model.json"]);
    ok(d, &["explain", "--model", "model.json", "--input", "ex.csv", "--out", "attr.json"]);
    let attributions = json(&d.join("attr.json"));
    let first = &attributions[0];
    let prediction = first["prediction"].as_f64().unwrap();
    let mut reader = csv::Reader::from_path(d.join("attr.waterfall.csv")).unwrap();
    let last: Vec<String> = reader.records().map(|r| r.unwrap()).last().unwrap().iter().map(str::to_string).collect();
    let end: f64 = last[3].parse().unwrap();
    assert!((end - prediction).abs() < 1e-9, "{end} vs {prediction}");
    assert!(d.join("attr.beeswarm.csv").exists());
}
