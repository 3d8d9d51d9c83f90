//! End-to-end checks of the CLI surface: exit codes, CSV determinism, and
//! verdict output.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn pit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pit")).args(args).output().expect("binary runs")
}

fn write_temp(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("pit-cli-test-{}-{}", std::process::id(), name));
    fs::write(&path, contents).unwrap();
    path
}

#[test]
fn gen_is_deterministic_with_header() {
    let args = [
        "gen", "--model", "commutative", "--n", "3", "--d", "2", "--r", "2", "--index-range",
        "0..500",
    ];
    let a = pit(&args);
    let b = pit(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,x3"));
    assert_eq!(text.lines().count(), 501);
    let first = lines.next().expect("at least one point");
    assert_eq!(first.split(',').count(), 3);
    assert!(!text.contains('\r'));
    // the sidecar goes to stderr and is valid JSON
    let sidecar: serde_json::Value = serde_json::from_slice(&a.stderr).unwrap();
    // smallest prime meeting the commutative bound n*d + 1 = 7
    assert_eq!(sidecar["p"].as_u64().unwrap(), 7);
}

#[test]
fn missing_arguments_exit_1() {
    assert_eq!(pit(&["gen", "--model", "commutative"]).status.code(), Some(1));
    assert_eq!(pit(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn explicit_modulus_below_bound_exits_2() {
    let out = pit(&[
        "gen", "--model", "unknown-order", "--n", "4", "--d", "2", "--r", "2", "--p", "101",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_circuit_file_exits_2() {
    let path = write_temp("bad.json", r#"{"kind":"mystery","p":101}"#);
    let out = pit(&["test", "--circuit", path.to_str().unwrap(), "--mode", "grid"]);
    assert_eq!(out.status.code(), Some(2));
    fs::remove_file(path).ok();
}

#[test]
fn grid_test_reports_nonzero() {
    let path = write_temp(
        "diag.json",
        r#"{"kind":"diagonal","p":101,"n":2,"terms":[{"coeffs":[1,1,1],"power":2}]}"#,
    );
    let out = pit(&["test", "--circuit", path.to_str().unwrap(), "--mode", "grid"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "nonzero");
    assert!(v["witness"].is_array());
    fs::remove_file(path).ok();
}

#[test]
fn random_mode_requires_seed() {
    let path = write_temp(
        "diag2.json",
        r#"{"kind":"diagonal","p":101,"n":2,"terms":[{"coeffs":[0,1,1],"power":1}]}"#,
    );
    let out = pit(&["test", "--circuit", path.to_str().unwrap(), "--mode", "random"]);
    assert_eq!(out.status.code(), Some(2));
    let ok = pit(&[
        "test", "--circuit", path.to_str().unwrap(), "--mode", "random", "--seed", "5",
    ]);
    assert_eq!(ok.status.code(), Some(0));
    fs::remove_file(path).ok();
}

#[test]
fn corrupt_suite_exits_3() {
    let out = pit(&[
        "verify", "--suite", "unknown-order", "--trials", "2", "--seed", "1", "--corrupt",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let clean = pit(&["verify", "--suite", "wronskian", "--trials", "5", "--seed", "1"]);
    assert_eq!(clean.status.code(), Some(0));
}
