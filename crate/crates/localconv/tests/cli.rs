//! End-to-end checks of the command-line interface: canonical JSON output,
//! determinism across runs, and the documented exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_localconv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn testdata(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("testdata")
        .join(name)
        .display()
        .to_string()
}

#[test]
fn kloosterman_json_output() {
    let out = run(&["conv-inf-inf", &testdata("kl2.json")]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["p"], 7);
    assert_eq!(v["rank"], 2);
    assert_eq!(v["swan"], 1);
    assert_eq!(v["atoms"][0]["N"], 2);
    assert_eq!(v["atoms"][0]["chi"], "1/2");
    assert_eq!(v["atoms"][0]["unip"], 1);
    assert_eq!(v["atoms"][0]["psi"][0][0], 1);
    assert_eq!(v["atoms"][0]["psi"][0][1], "[2]@1");
    // moduli echoed for reproducibility
    assert_eq!(v["moduli"]["1"], serde_json::json!([0, 1]));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let a = run(&["conv-inf-inf", &testdata("worked_p5.json"), "--trace"]);
    let b = run(&["conv-inf-inf", &testdata("worked_p5.json"), "--trace"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["ft0inf", &testdata("quadratic.json"), "--path", "both"]);
    let d = run(&["ft0inf", &testdata("quadratic.json"), "--path", "both"]);
    assert!(c.status.success());
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn zero_output_is_empty_with_exit_zero() {
    let out = run(&["conv-0-inf", &testdata("zero_slope.json")]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["atoms"], serde_json::json!([]));
    assert_eq!(v["rank"], 0);
}

#[test]
fn hypothesis_violation_exits_2() {
    // p = 5 divides deg f after the file is otherwise valid
    let dir = std::env::temp_dir().join("localconv-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad_degree.json");
    std::fs::write(
        &path,
        r#"{"p": 5, "F": {"a": 1, "f": [[5, 1]], "chi": "0/1", "n": 1},
           "G": {"a": 1, "f": [[1, 1]], "chi": "0/1", "n": 1}}"#,
    )
    .unwrap();
    let out = run(&["conv-inf-inf", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "hypothesis-violation");
}

#[test]
fn parse_error_exits_1() {
    let dir = std::env::temp_dir().join("localconv-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.json");
    std::fs::write(&path, r#"{"p": 7, "F": {"a": 1}}"#).unwrap();
    let out = run(&["conv-inf-inf", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn ft_paths_agree_and_emit_once() {
    let out = run(&["ftinfinf", &testdata("quadratic.json"), "--path", "both"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["atoms"].as_array().unwrap().len(), 1);
    assert_eq!(v["atoms"][0]["psi"][0][1], "[5]@1"); // -1/4 = 5 mod 7
}

#[test]
fn invariants_roundtrip() {
    let out = run(&["conv-inf-inf", &testdata("kl2.json")]);
    assert!(out.status.success());
    let dir = std::env::temp_dir().join("localconv-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("kl2_rep.json");
    std::fs::write(&path, &out.stdout).unwrap();
    let inv = run(&["invariants", path.to_str().unwrap()]);
    assert!(inv.status.success());
    let v: serde_json::Value = serde_json::from_slice(&inv.stdout).unwrap();
    assert_eq!(v["rank"], 2);
    assert_eq!(v["swan"], 1);
    assert_eq!(v["slopes"], serde_json::json!(["1/2"]));
}

#[test]
fn selfcheck_reports_groups() {
    let out = run(&["selfcheck"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("kloosterman"));
    assert!(text.contains("selfcheck ok"));
    assert!(!text.contains("FAILED"));
}

#[test]
fn pretty_report_mentions_atoms() {
    let out = run(&["conv-inf-inf", &testdata("kl2.json"), "--pretty"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("rank 2"));
    assert!(text.contains("[2]_*"));
    assert!(text.contains("slope 1/2"));
}
