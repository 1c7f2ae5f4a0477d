use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn dropcase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dropcase")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", stderr(out));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

/// `x(t+1) = 2x + σu`, observed directly.
fn scalar_system(dir: &TempDir) -> String {
    let one = |v: f64| format!(r#"{{"rows": 1, "cols": 1, "data": [{v}]}}"#);
    let text = format!(r#"{{"A": {}, "B": {}, "C": {}}}"#, one(2.0), one(1.0), one(1.0));
    write(dir, "sys.json", &text).to_str().unwrap().to_string()
}

#[test]
fn minimal_listing_in_both_formats() {
    let doc = json(&dropcase(&["minimal", "--k", "1", "--T", "4"]));
    assert_eq!(doc["count"], 3);
    assert_eq!(doc["signals"], serde_json::json!(["0101", "0110", "1010"]));

    let out = dropcase(&["minimal", "--k", "1", "--T", "4", "--method", "filter", "--out", "csv"]);
    assert_eq!(stdout(&out), "signal\n0101\n0110\n1010\n");
}

#[test]
fn custom_automaton_file() {
    let dir = TempDir::new().unwrap();
    // a single node with only a delivery self-loop: the all-ones signal
    let path = write(&dir, "a.json", r#"{"nodes": [0], "start": [0], "edges": [{"from": 0, "to": 0, "label": "1"}]}"#);
    let doc = json(&dropcase(&["admissible", "--automaton", path.to_str().unwrap(), "--T", "3"]));
    assert_eq!(doc["signals"], serde_json::json!(["111"]));
    let out = dropcase(&["minimal", "--automaton", path.to_str().unwrap(), "--T", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn scalar_problems_match_hand_values() {
    let dir = TempDir::new().unwrap();
    let sys = scalar_system(&dir);
    let base = ["--k", "1", "--T", "1", "--system", sys.as_str()];

    // one step with a possible dropout: P(0) is 3 if delivered, 5 if lost
    let lqr = json(&dropcase(&[&["lqr-maxmin"], &base[..], &["--x0", "1"]].concat()));
    assert_eq!(lqr["worst_value"].as_f64(), Some(5.0));
    assert_eq!(lqr["argmax_signal"], "0");

    let energy = json(&dropcase(&[&["energy"], &base[..]].concat()));
    assert_eq!(energy["worst_value"], "inf");
    // over two steps the worst signal 01 leaves only the last input: u = 1
    let energy = json(&dropcase(&["energy", "--k", "1", "--T", "2", "--system", sys.as_str()]));
    assert!((energy["worst_value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(energy["argmax_signal"], "01");

    let t = json(&dropcase(&["estimate-time", "--k", "1", "--T", "4", "--system", sys.as_str()]));
    assert_eq!(t["worst_value"].as_f64(), Some(1.0));
    assert_eq!(t["worst_steps"].as_f64(), Some(2.0));
}

#[test]
fn csv_summary_has_header_and_row() {
    let dir = TempDir::new().unwrap();
    let sys = scalar_system(&dir);
    let out = dropcase(&["fuel", "--k", "1", "--T", "4", "--system", &sys, "--out", "csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("problem,mode,worst_value"));
    assert!(lines[1].starts_with("III,minimal,"));
}

#[test]
fn reach_reports_containment() {
    let dir = TempDir::new().unwrap();
    let sys = scalar_system(&dir);
    let small = write(&dir, "small.json", r#"{"vertices": [[0.01], [-0.01]]}"#);
    let large = write(&dir, "large.json", r#"{"vertices": [[100.0], [-100.0]]}"#);
    let run = |p: &PathBuf| json(&dropcase(&["reach", "--k", "1", "--T", "4", "--system", &sys, "--polytope", p.to_str().unwrap()]));
    assert_eq!(run(&small)["reachable"], true);
    assert_eq!(run(&large)["reachable"], false);
}

#[test]
fn bad_inputs_exit_with_one_and_name_the_file() {
    let dir = TempDir::new().unwrap();
    let broken = write(&dir, "broken.json", "{\"A\": {\"rows\": 1,\n \"cols\": 1, \"data\": [1.0]},\n \"X\": 3}");
    let out = dropcase(&["energy", "--k", "1", "--T", "3", "--system", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("broken.json") && msg.contains("line 3"), "{msg}");

    let sys = scalar_system(&dir);
    let out = dropcase(&["energy", "--k", "1", "--T", "3", "--system", &sys, "--xf", "1,2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--xf"));

    let out = dropcase(&["energy", "--k", "1", "--automaton", "x.json", "--T", "3", "--system", &sys]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn study_is_reproducible_and_flags_override_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "cfg.json", r#"{"problem": "V", "states": 3, "inputs": 2, "samples": 5, "horizon": 6, "seed": 3}"#);
    let cfg = cfg.to_str().unwrap();
    let a = dropcase(&["study", "--config", cfg, "--out", "csv"]);
    let b = dropcase(&["study", "--config", cfg, "--out", "csv"]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a).lines().count(), 6);

    let doc = json(&dropcase(&["study", "--config", cfg, "--samples", "2", "--parallel", "1"]));
    assert_eq!(doc["config"]["samples"], 2);
    assert_eq!(doc["config"]["problem"], "V");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn failed_study_exits_with_two() {
    let out = dropcase(&[
        "study", "--problem", "III", "--states", "2", "--inputs", "1", "--samples", "3", "--T", "6",
        "--mode", "exhaustive", "--exhaustive-cap", "2",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}
