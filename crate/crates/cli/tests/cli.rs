use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn goldfish(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_goldfish"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = goldfish(&all);
    let json = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().expect("exit code"), json)
}

fn statuses(r: &Value) -> Vec<String> {
    r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["status"].as_str().unwrap().to_string())
        .collect()
}

fn count(r: &Value, status: &str) -> usize {
    statuses(r).iter().filter(|s| *s == status).count()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn catalog_verifies() {
    let (code, r) = report(&["symmetries", "--n", "2", "--catalog"]);
    assert_eq!(code, 0);
    assert_eq!(count(&r, "pass"), 15);
    assert_eq!(r["status"], "pass");
}

#[test]
fn user_fields() {
    let (code, _) = report(&["symmetries", "--n", "3", "--field", r#"{"xi":"1","etas":["0","0","0"]}"#]);
    assert_eq!(code, 0);
    let (code, r) = report(&["symmetries", "--n", "2", "--field", r#"{"xi":"0","etas":["t","0"]}"#]);
    assert_eq!(code, 1);
    assert_eq!(r["checks"][0]["residual"].as_array().unwrap().len(), 2);
}

#[test]
fn malformed_input_is_a_usage_error() {
    assert_eq!(goldfish(&["symmetries", "--n", "2", "--field", "{\"xi\":"]).status.code(), Some(2));
    assert_eq!(goldfish(&["symmetries", "--n", "2", "--field", r#"{"xi":"1","etas":["0"]}"#]).status.code(), Some(2));
    assert_eq!(goldfish(&["symmetries", "--n", "3", "--catalog"]).status.code(), Some(2));
    assert_eq!(goldfish(&["noether", "--index", "16"]).status.code(), Some(2));
    assert_eq!(goldfish(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(goldfish(&["solve", "--init", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn noether_partition() {
    let (code, r) = report(&["noether", "--all"]);
    assert_eq!(code, 1);
    assert_eq!((count(&r, "pass"), count(&r, "fail")), (8, 7));

    let (code, r) = report(&["noether", "--index", "7"]);
    assert_eq!(code, 0);
    let integral = r["data"][0]["integral"].as_str().unwrap();
    assert_eq!(integral, "(-x1^2*v2^2 - 2*x1*x2*v1*v2 - x2^2*v1^2 - v1^2 - 2*v1*v2 - v2^2)/(2)");

    let (code, r) = report(&["noether", "--index", "13"]);
    assert_eq!(code, 1);
    assert!(r["data"][0]["obstruction"].is_string());
}

#[test]
fn quantize_two_body() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pde.json");
    let (code, r) = report(&["quantize", "--n", "2", "--verify-symmetries", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(count(&r, "pass"), 10);
    assert_eq!(r["data"]["f"][0][0], "(x1^2 + 1)/(x1^2 - 2*x1*x2 + x2^2)");
    assert_eq!(r["data"]["h0"], "(-E0^2)");
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(saved, r["data"]);
    assert!(r["checks"][9]["max_value"].as_f64().unwrap() < 1e-10);
}

#[test]
fn quantize_small_and_large() {
    let (code, r) = report(&["quantize", "--n", "1", "--e0", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r["data"]["f"][0][0], "(1)");
    assert_eq!(r["data"]["h0"], "(-4)");
    let (code, r) = report(&["quantize", "--n", "4", "--e0", "1"]);
    assert_eq!(code, 0);
    assert!(r["checks"][0]["max_value"].as_f64().unwrap() < 1e-8);
}

#[test]
fn reports_are_deterministic() {
    let strip = |mut r: Value| {
        r.as_object_mut().unwrap().remove("elapsed_ms");
        r
    };
    let a = strip(report(&["--seed", "7", "quantize", "--n", "3"]).1);
    let b = strip(report(&["--seed", "7", "quantize", "--n", "3"]).1);
    assert_eq!(a, b);
}

#[test]
fn solve_one_particle() {
    let dir = tempfile::tempdir().unwrap();
    let init = write_temp(&dir, "n1.json", r#"{"positions":[0.0],"velocities":[1.0]}"#);
    let (code, r) = report(&["solve", "--init", init.to_str().unwrap(), "--t", "2", "--method", "both"]);
    assert_eq!(code, 0);
    let row = &r["table"][0];
    assert_eq!(row["algebraic"], row["rk"]);
    assert!((row["rk"][0].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn solve_grid_cross_check() {
    let dir = tempfile::tempdir().unwrap();
    let init = write_temp(&dir, "n2.json", r#"{"positions":[0.0,1.0],"velocities":[-0.25,0.5]}"#);
    let csv = dir.path().join("traj.csv");
    let (code, r) = report(&[
        "solve",
        "--init",
        init.to_str().unwrap(),
        "--grid",
        "0.1:1.0:10",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["table"].as_array().unwrap().len(), 10);
    let worst = r["checks"][2]["max_value"].as_f64().unwrap();
    assert!(worst < 1e-6, "{worst}");
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("t,x1,x2,v1,v2\n"));
}

#[test]
fn head_on_collision_fails() {
    let dir = tempfile::tempdir().unwrap();
    let init = write_temp(&dir, "headon.json", r#"{"positions":[-1.0,1.0],"velocities":[1.0,-1.0]}"#);
    let (code, r) = report(&["solve", "--init", init.to_str().unwrap(), "--method", "rk"]);
    assert_eq!(code, 1);
    let events = r["data"]["events"].as_array().unwrap();
    assert!(!events.is_empty());
    assert!(events[0]["time"].as_f64().unwrap() < 1.0);
}

#[test]
fn corrupted_catalog_fails_fast() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_temp(&dir, "bad.json", "[{\"xi\": \"1\"");
    assert_eq!(goldfish(&["check", "--catalog-path", bad.to_str().unwrap()]).status.code(), Some(2));

    let out = goldfish(&["symmetries", "--catalog", "--export", dir.path().join("cat.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let mut fields: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("cat.json")).unwrap()).unwrap();
    fields[3]["etas"][0] = Value::String("t".into());
    let wrong = write_temp(&dir, "wrong.json", &fields.to_string());
    let (code, r) = report(&["check", "--catalog-path", wrong.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(statuses(&r), vec!["fail"]);
}
