use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zetagap"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn assert_valid(schema_name: &str, doc: &Value) {
    let path = manifest_dir().join("schemas").join(format!("{schema_name}.schema.json"));
    let schema: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(doc) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "{schema_name} report does not validate: {msgs:?}");
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn h_eval_default_reproduces_headline() {
    let out = run(&["h-eval"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json_of(&out);
    assert_valid("h_eval", &doc);
    let h = doc["breakdown"]["h"].as_f64().unwrap();
    assert!((h - 0.998885).abs() <= 5e-4, "{h}");
    assert_eq!(doc["preset"], "paper-2009-r2-m10");
}

#[test]
fn h_eval_zero_window_and_degenerate_mollifier() {
    let out = run(&["h-eval", "--c", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["breakdown"]["h"].as_f64(), Some(0.0));
    let out = run(&["h-eval", "--p1", "0", "--p2", "0"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn configuration_errors_exit_2() {
    for args in [
        vec!["h-eval", "--r", "0", "--p1", "1", "--p2", "1"],
        vec!["h-eval", "--preset", "no-such-preset"],
        vec!["h-eval", "--p1", "1,abc", "--p2", "1"],
        vec!["h-eval", "--p1", "1"],
        vec!["h-eval", "--theta", "0.4"],
        vec!["h-eval", "--r", "1"],
        vec!["oracle", "--suite", "bogus"],
        vec!["zeros"],
        vec!["certify", "--bracket-lo", "3", "--bracket-hi", "2"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", r#"{"r": 1, "c": 1.0, "p1": [1.0, -0.5], "p2": [0.25], "j_max": 30}"#);
    let out = run(&["h-eval", "--config", cfg.to_str().unwrap(), "--c", "2.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json_of(&out);
    assert_valid("h_eval", &doc);
    assert_eq!(doc["params"]["c"].as_f64(), Some(2.5));
    assert_eq!(doc["params"]["r"].as_u64(), Some(1));
    assert_eq!(doc["params"]["j_max"].as_u64(), Some(30));
    assert_eq!(doc["p1"], serde_json::json!([1.0, -0.5]));

    let bad = write(dir.path(), "bad.json", r#"{"radius": 3}"#);
    assert_eq!(run(&["h-eval", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = run(&["h-eval", "--c", "7.5"]);
    let b = run(&["h-eval", "--c", "7.5"]);
    assert_eq!(a.stdout, b.stdout);
    let a = run(&["oracle", "--suite", "b", "--seed", "5"]);
    let b = run(&["oracle", "--suite", "b", "--seed", "5"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn certify_writes_report_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["certify", "--grid-points", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json_of(&out);
    assert_valid("certify", &doc);
    assert!(doc["result"]["lambda_bound"].as_f64().unwrap() >= 3.033);
    assert_eq!(doc["result"]["p1"].as_array().unwrap().len(), 11);
    let written: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("certify.json")).unwrap()).unwrap();
    assert_eq!(written, doc);
    let csv = fs::read_to_string(dir.path().join("h_min_grid.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "c,h_min");
    assert_eq!(lines.len(), 4);
}

#[test]
fn certify_bad_bracket_exits_4() {
    let out = run(&["certify", "--m", "2", "--bracket-lo", "1", "--bracket-hi", "2", "--grid-points", "0"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn oracle_constants_suite() {
    let out = run(&["oracle", "--suite", "constants"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json_of(&out);
    assert_valid("oracle", &doc);
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["checks"].as_array().unwrap().len(), 4);
}

#[test]
fn oracle_window_suite_small() {
    let out = run(&["oracle", "--suite", "window", "--pairs", "2", "--seed", "17"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json_of(&out);
    assert_valid("oracle", &doc);
    assert!(doc["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn zeros_three_zero_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "z.txt", "14.134725\n21.022040\n25.010858\n");
    let outdir = dir.path().join("out");
    let out = run(&[
        "zeros",
        "--zeros-file",
        f.to_str().unwrap(),
        "--variant",
        "paper_log_gamma",
        "--thresholds",
        "1,3.033",
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json_of(&out);
    assert_valid("zeros", &doc);
    assert_eq!(doc["summary"]["count"].as_u64(), Some(2));
    let d1 = doc["first_gap"]["delta"].as_f64().unwrap();
    assert!((d1 - 2.9034).abs() < 1e-3);
    assert_eq!(doc["summary"]["exceeding"][0]["count"].as_u64(), Some(2));
    assert_eq!(doc["summary"]["exceeding"][1]["count"].as_u64(), Some(0));
    let csv = fs::read_to_string(outdir.join("gaps.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn zeros_fixture_and_offset_format() {
    let fixture = manifest_dir().join("fixtures/first100_zeros.txt");
    let out = run(&["zeros", "--zeros-file", fixture.to_str().unwrap(), "--variant", "paper_log_gamma"]);
    let doc = json_of(&out);
    assert_valid("zeros", &doc);
    assert!((doc["first_gap"]["delta"].as_f64().unwrap() - 2.9034).abs() < 1e-3);

    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "off.txt", "# base\n14.0\n0.134725\n7.022040\n11.010858\n");
    let out = run(&["zeros", "--zeros-file", f.to_str().unwrap(), "--format", "offset"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["count"].as_u64(), Some(3));
}

#[test]
fn zeros_malformed_file_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.txt", "14.134725\n21.0x\n");
    let out = run(&["zeros", "--zeros-file", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let f = write(dir.path(), "desc.txt", "21.0\n14.1\n");
    let out = run(&["zeros", "--zeros-file", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("index 1"));
}
