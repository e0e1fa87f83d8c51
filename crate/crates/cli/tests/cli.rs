use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const E1: &str = r#"{"name": "e1", "m": 2, "n": 4, "A": [[1, 0, 1, 0], [0, 1, 0, 1]], "b": [1, 1], "c": [-1, -1, 0, 0]}"#;

fn pnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pnorm")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_e1_from_the_slack_basis() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "e1.json", E1);
    let out = pnorm(&["solve", s(&inst), "--rule", "steepest", "--initial", "3,4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "Optimal, 2 iterations, objective -2");
    let trace = fs::read_to_string(dir.path().join("e1.trace.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&trace).unwrap();
    assert_eq!(json["records"].as_array().unwrap().len(), 2);
}

#[test]
fn steepest_is_pnorm_two() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "e1.json", E1);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    pnorm(&["solve", s(&inst), "--rule", "steepest", "--initial", "3,4", "--trace", s(&a)]);
    pnorm(&["solve", s(&inst), "--rule", "pnorm:2", "--initial", "3,4", "--trace", s(&b)]);
    let strip = |p: &Path| {
        let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("rule");
        v["records"].clone()
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn malformed_instance_exits_with_parse_code() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"name": "bad", "m": 1, "n": 2, "A": [[1.5, 1]], "b": [1], "c": [0, 0]}"#);
    assert_eq!(pnorm(&["solve", s(&bad)]).status.code(), Some(10));
    assert_eq!(pnorm(&["solve", s(&dir.path().join("missing.json"))]).status.code(), Some(10));
    assert_eq!(pnorm(&["solve"]).status.code(), Some(2));
}

#[test]
fn unbounded_and_infeasible_exit_codes() {
    let dir = TempDir::new().unwrap();
    let ray = write(&dir, "ray.json", r#"{"name": "ray", "m": 1, "n": 2, "A": [[1, -1]], "b": [1], "c": [0, -1]}"#);
    let out = pnorm(&["solve", s(&ray), "--initial", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).starts_with("Unbounded"));
    let empty = write(&dir, "empty.json", r#"{"name": "empty", "m": 1, "n": 2, "A": [[1, 1]], "b": [-1], "c": [1, 1]}"#);
    assert_eq!(pnorm(&["solve", s(&empty)]).status.code(), Some(4));
}

#[test]
fn analyze_e1_prints_the_bounds() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "e1.json", E1);
    let out = pnorm(&["analyze", s(&inst), "--p", "2", "--initial", "3,4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("gamma=1 delta=1 q=1 thm3=2 thm4=4 thm5=2 thm6=4 km1=2 km2=4 km3=2"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("e1.analysis.json")).unwrap()).unwrap();
    assert_eq!(report["bounds"]["thm4"], 4);
}

#[test]
fn analyze_rejects_degenerate_instances() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "deg.json", &E1.replace("\"b\": [1, 1]", "\"b\": [1, 0]"));
    assert_eq!(pnorm(&["analyze", s(&inst)]).status.code(), Some(7));
}

#[test]
fn generate_then_verify_klee_minty() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("km3.json");
    assert_eq!(pnorm(&["generate", "kleeminty", "--m", "3", "-o", s(&inst)]).status.code(), Some(0));
    let out = pnorm(&["solve", s(&inst), "--rule", "dantzig"]);
    assert_eq!(stdout(&out).trim(), "Optimal, 7 iterations, objective -125");
    let out = pnorm(&["analyze", s(&inst)]);
    assert!(stdout(&out).contains("8 feasible bases"));
    let out = pnorm(&["verify", s(&inst), s(&dir.path().join("km3.trace.json"))]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().all(|l| l.starts_with("pass ")));
}

#[test]
fn verify_flags_a_tampered_trace() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "e1.json", E1);
    pnorm(&["solve", s(&inst), "--initial", "3,4"]);
    let path = dir.path().join("e1.trace.json");
    let text = fs::read_to_string(&path).unwrap().replacen("\"step\": \"1\"", "\"step\": \"2\"", 1);
    fs::write(&path, text).unwrap();
    let out = pnorm(&["verify", s(&inst), s(&path)]);
    assert_eq!(out.status.code(), Some(9));
    assert!(stdout(&out).contains("FAIL record_consistency"));
}

#[test]
fn generated_instances_are_reproducible() {
    let a = pnorm(&["generate", "random", "--m", "3", "--n", "6", "--seed", "4"]);
    let b = pnorm(&["generate", "random", "--m", "3", "--n", "6", "--seed", "4"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let d = pnorm(&["generate", "dmdp", "--m", "2", "--k", "2", "--theta", "9/10", "--seed", "3"]);
    assert!(stdout(&d).contains("\"name\": \"dmdp-m2-k2-t9_10-s3\""));
    assert_eq!(pnorm(&["generate", "dmdp", "--m", "2", "--k", "2", "--theta", "0.9"]).status.code(), Some(10));
}

#[test]
fn experiment_output_is_identical_across_runs_and_modes() {
    let dir = TempDir::new().unwrap();
    write(&dir, "e1.json", &E1.replace('}', ", \"initial_basis\": [3, 4]}"));
    let config = write(
        &dir,
        "exp.json",
        r#"{"instances": [{"kind": "file", "path": "e1.json"}, {"kind": "random", "m": 2, "n": 5},
            {"kind": "klee_minty", "dims": [3]}], "rules": ["dantzig", "best", "pnorm"],
            "p_values": ["1", "2", "inf"], "seeds": [1, 2]}"#,
    );
    let runs: Vec<String> = [&[][..], &[][..], &["--sequential"][..]]
        .iter()
        .map(|extra| {
            let mut args = vec!["experiment", s(&config)];
            args.extend_from_slice(extra);
            let out = pnorm(&args);
            assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
            stdout(&out)
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
    assert_eq!(runs[0].lines().count(), 1 + (1 + 2 + 1) * 5);
    let out = dir.path().join("rows.json");
    pnorm(&["experiment", s(&config), "--format", "json", "-o", s(&out)]);
    let rows: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(rows["rows"].as_array().unwrap().len(), 20);
}
