use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../fixtures/{name}.json"))
}

fn run(args: &[&str], input: &Path, dir: &Path) -> (i32, Value, String) {
    let report = dir.join("report.json");
    let out = Command::new(env!("CARGO_BIN_EXE_pfaffian"))
        .args(args)
        .arg(input)
        .arg("--report")
        .arg(&report)
        .output()
        .unwrap();
    let value = std::fs::read_to_string(&report)
        .map(|t| serde_json::from_str(&t).unwrap())
        .unwrap_or(Value::Null);
    (out.status.code().unwrap(), value, String::from_utf8_lossy(&out.stdout).into_owned())
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r, _) = run(&["check"], &fixture("exm"), dir.path());
    assert_eq!(code, 0);
    assert_eq!(r["status"], "ok");
    assert_eq!(r["input_digest"]["sha256"].as_str().unwrap().len(), 64);
    let (code, r, _) = run(&["check"], &fixture("exmnaive_printed"), dir.path());
    assert_eq!(code, 1);
    assert_eq!(r["error"]["kind"], "IntegrabilityViolation");
    let (code, r, _) = run(&["check"], &dir.path().join("missing.json"), dir.path());
    assert_eq!(code, 2);
    assert_eq!(r["error"]["kind"], "IoError");
}

#[test]
fn perturbed_fixture_is_not_integrable() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(fixture("exm")).unwrap()).unwrap();
    doc["B_terms"][0]["matrix"][0][0] = Value::String("-5".into());
    let p = write(dir.path(), "perturbed.json", &doc.to_string());
    assert_eq!(run(&["check"], &p, dir.path()).0, 1);
}

#[test]
fn parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "neg.json",
        r#"{"n": 1, "p": 0, "q": 0, "trunc_x": 4, "trunc_y": 4,
            "A_terms": [{"i": -1, "j": 0, "matrix": [["1"]]}], "B_terms": []}"#,
    );
    let (code, r, _) = run(&["check"], &p, dir.path());
    assert_eq!(code, 2);
    assert_eq!(r["error"]["kind"], "ParseError");
}

#[test]
fn reduce_writes_reduced_document() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("exmnaive.json");
    std::fs::copy(fixture("exmnaive"), &input).unwrap();
    let (code, r, out) = run(&["reduce"], &input, dir.path());
    assert_eq!(code, 0, "{out}");
    assert_eq!(r["results"]["final"]["p"], 0);
    assert_eq!(r["results"]["final"]["q"], 0);
    let steps = r["results"]["steps"].as_array().unwrap();
    assert!(!steps.is_empty());
    assert!(r["windows"].as_array().unwrap().iter().all(|w| w["window"].is_object()));
    let reduced = dir.path().join("exmnaive.reduced.json");
    let (code, r, _) = run(&["reduce"], &reduced, dir.path());
    assert_eq!(code, 0);
    assert!(r["results"]["steps"].as_array().unwrap().is_empty());
    assert!(r["results"]["gauge"]["provenance"].as_array().unwrap().is_empty());
}

#[test]
fn analysis_commands_on_exm() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, out) = run(&["expparts"], &fixture("exm"), dir.path());
    assert_eq!(code, 0);
    assert!(out.contains("Q1: -1/x (multiplicity 2)"));
    assert!(out.contains("Q2: 3/y^2 + 2/y (multiplicity 2)"));
    let (code, r, _) = run(&["katz"], &fixture("exm"), dir.path());
    assert_eq!(code, 0);
    assert_eq!(r["results"]["true_poincare_rank"], serde_json::json!([1, 2]));
    let (code, r, _) = run(&["solve"], &fixture("exm"), dir.path());
    assert_eq!(code, 0);
    assert_eq!(r["results"]["lambda1_spectrum"]["eigenvalues"], serde_json::json!(["-2", "1"]));
    assert_eq!(r["results"]["lambda2_spectrum"]["eigenvalues"], serde_json::json!(["-2", "-1"]));
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (_, a, _) = run(&["solve"], &fixture("exm"), dir.path());
    let (_, b, _) = run(&["solve"], &fixture("exm"), dir.path());
    assert_eq!(a, b);
}

#[test]
fn strict_mode_and_truncation_override() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r, _) = run(&["--strict", "solve"], &fixture("exm"), dir.path());
    assert_eq!(code, 3);
    assert_eq!(r["error"]["kind"], "TruncationExhausted");
    assert_eq!(run(&["--strict", "check"], &fixture("exm"), dir.path()).0, 0);
    let (code, r, _) = run(&["check", "--trunc-x", "12"], &fixture("exm"), dir.path());
    assert_eq!(code, 0);
    assert_eq!(r["truncation"]["x"], 12);
}

#[test]
fn field_extension_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "rot.json",
        r#"{"n": 2, "p": 1, "q": 0, "trunc_x": 4, "trunc_y": 4,
            "A_terms": [{"i": 0, "j": 0, "matrix": [["0", "-1"], ["1", "0"]]}], "B_terms": []}"#,
    );
    let (code, r, _) = run(&["expparts"], &p, dir.path());
    assert_eq!(code, 4);
    assert_eq!(r["error"]["kind"], "AlgebraicExtensionRequired");
    assert!(r["error"]["factor"].is_string());
}

#[test]
fn ramification_exits_four_with_partial_data() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "airy.json",
        r#"{"n": 2, "p": 1, "q": 0, "trunc_x": 8, "trunc_y": 2,
            "A_terms": [{"i": 0, "j": 0, "matrix": [["0", "1"], ["0", "0"]]},
                        {"i": 1, "j": 0, "matrix": [["0", "0"], ["1", "0"]]}], "B_terms": []}"#,
    );
    let (code, r, _) = run(&["solve"], &p, dir.path());
    assert_eq!(code, 4);
    assert_eq!(r["error"]["kind"], "RamificationRequired");
    assert_eq!(r["results"]["s"], serde_json::json!([2, 1]));
}

#[test]
fn joint_resonance_exits_five() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "res.json",
        r#"{"n": 2, "p": 0, "q": 0, "trunc_x": 4, "trunc_y": 4,
            "A_terms": [{"i": 0, "j": 0, "matrix": [["1", "0"], ["0", "0"]]},
                        {"i": 1, "j": 1, "matrix": [["0", "1"], ["0", "0"]]}],
            "B_terms": [{"i": 0, "j": 0, "matrix": [["1", "0"], ["0", "0"]]},
                        {"i": 1, "j": 1, "matrix": [["0", "1"], ["0", "0"]]}]}"#,
    );
    let (code, r, _) = run(&["solve"], &p, dir.path());
    assert_eq!(code, 5);
    assert_eq!(r["error"]["monomials"], serde_json::json!([[1, 1]]));
}
