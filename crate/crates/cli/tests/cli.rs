use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use qdsm_core::io::{write_certificate, write_family};
use qdsm_core::ConjugacyCertificate;
use serde_json::Value;
use tempfile::TempDir;

fn qdsm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdsm")).args(args).output().expect("spawn qdsm")
}

fn qdsm_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_qdsm"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn qdsm");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

/// Writes `qdsm example <args>` output into `dir/name`.
fn example_file(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let mut full = vec!["example"];
    full.extend_from_slice(args);
    let out = qdsm(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = dir.path().join(name);
    std::fs::write(&path, &out.stdout).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_ex2_11() {
    let dir = TempDir::new().unwrap();
    let f = example_file(&dir, "ex211.json", &["ex2.11"]);
    let out = qdsm(&["analyze", s(&f), "--json"]);
    assert!(out.status.success());
    assert!(out.stderr.is_empty(), "--json should silence the text report");
    let v = json(&out);
    assert_eq!(v["channel"]["dim"], 3);
    assert_eq!(v["channel"]["index"], 3);
    assert_eq!(v["channel"]["unital"], true);
    assert_eq!(v["channel"]["trace_preserving"], true);
    assert_eq!(v["extremality"]["cp"]["extremal"], true);
    assert_eq!(v["extremality"]["cp_phi"]["extremal"], true);
    assert_eq!(v["consistent"], true);
}

#[test]
fn analyze_text_goes_to_stderr() {
    let dir = TempDir::new().unwrap();
    let f = example_file(&dir, "ex212.json", &["ex2.12", "--m", "2"]);
    let out = qdsm(&["analyze", s(&f)]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("numerical index  2"), "{text}");
    assert!(text.contains("CP-extremal      no"), "{text}");
    let v = json(&out);
    assert_eq!(v["extremality"]["cp"]["extremal"], false);
    assert_eq!(v["spectral"]["ergodic"], true);
}

#[test]
fn analyze_output_is_byte_stable() {
    let dir = TempDir::new().unwrap();
    let f = example_file(&dir, "ex24.json", &["ex2.4"]);
    let a = qdsm(&["analyze", s(&f), "--json", "--decompose"]);
    let b = qdsm(&["analyze", s(&f), "--json", "--decompose"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn decompose_ex2_12_into_two_halves() {
    let dir = TempDir::new().unwrap();
    let f = example_file(&dir, "ex212.json", &["ex2.12", "--m", "2"]);
    let out = qdsm(&["decompose", s(&f), "--kind", "cp", "--json"]);
    assert!(out.status.success());
    let terms = json(&out);
    let terms = terms.as_array().expect("array of terms");
    assert_eq!(terms.len(), 2);
    for t in terms {
        assert!((num(&t["weight"]) - 0.5).abs() < 1e-10);
        assert_eq!(t["channel"]["kraus"].as_array().unwrap().len(), 1);
    }
}

#[test]
fn exhausted_depth_exits_3() {
    let dir = TempDir::new().unwrap();
    let f = example_file(&dir, "dep.json", &["depolarizing", "--n", "2"]);
    let out = qdsm(&["decompose", s(&f), "--max-depth", "0", "--json"]);
    assert_eq!(out.status.code(), Some(3));
    // Partial results are still reported.
    assert_eq!(json(&out).as_array().unwrap().len(), 1);

    let out = qdsm(&["analyze", s(&f), "--decompose", "--max-depth", "0", "--json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn conjugacy_with_antiunitary_certificate() {
    let dir = TempDir::new().unwrap();
    let a = example_file(&dir, "a.json", &["ex2.4"]);
    let family = qdsm_core::catalog::ex2_4_family();
    let b = dir.path().join("b.json");
    std::fs::write(&b, write_family(&family.adjoint())).unwrap();
    let cert = dir.path().join("cert.json");
    std::fs::write(&cert, write_certificate(&ConjugacyCertificate::identity(4, 2, true))).unwrap();

    let out = qdsm(&["conjugacy", s(&a), s(&b), "--certificate", s(&cert), "--json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["invariants_match"], true);
    assert_eq!(v["certificate_verified"], true);
    assert!(num(&v["certificate_residual"]) < 1e-12);

    // The same certificate read as unitary must be rejected.
    std::fs::write(&cert, write_certificate(&ConjugacyCertificate::identity(4, 2, false))).unwrap();
    let out = qdsm(&["conjugacy", s(&a), s(&b), "--certificate", s(&cert), "--json"]);
    assert_eq!(json(&out)["certificate_verified"], false);
}

#[test]
fn conjugacy_invariant_mismatch() {
    let dir = TempDir::new().unwrap();
    let a = example_file(&dir, "a.json", &["ex2.12", "--m", "2"]);
    let b = example_file(&dir, "b.json", &["ex2.12", "--m", "3"]);
    let out = qdsm(&["conjugacy", s(&a), s(&b)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not conjugate"));
    assert_eq!(json(&out)["invariants_match"], false);
}

#[test]
fn conjugacy_dimension_mismatch_is_input_error() {
    let dir = TempDir::new().unwrap();
    let a = example_file(&dir, "a.json", &["ex2.4"]);
    let b = example_file(&dir, "b.json", &["ex2.11"]);
    assert_eq!(qdsm(&["conjugacy", s(&a), s(&b)]).status.code(), Some(1));
}

#[test]
fn birkhoff_from_stdin() {
    let input = r#"{"n": 3, "rows": [[0.5, 0.5, 0], [0, 0.5, 0.5], [0.5, 0, 0.5]]}"#;
    let out = qdsm_stdin(&["birkhoff", "-", "--json"], input);
    assert!(out.status.success());
    let terms = json(&out);
    let terms = terms.as_array().unwrap();
    assert_eq!(terms.len(), 2);
    let total: f64 = terms.iter().map(|t| num(&t["weight"])).sum();
    assert!((total - 1.0).abs() < 1e-12);
    let mut perms: Vec<Vec<u64>> = terms
        .iter()
        .map(|t| t["permutation"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect())
        .collect();
    perms.sort();
    assert_eq!(perms, vec![vec![0, 1, 2], vec![1, 2, 0]]);
}

#[test]
fn birkhoff_rejects_non_stochastic() {
    let input = r#"{"n": 2, "rows": [[0.7, 0.7], [0.3, 0.3]]}"#;
    assert_eq!(qdsm_stdin(&["birkhoff", "-"], input).status.code(), Some(1));
}

#[test]
fn unknown_example_exits_1() {
    let out = qdsm(&["example", "ex9.9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown example"));
}

#[test]
fn m2_example_round_trips() {
    let dir = TempDir::new().unwrap();
    let f = example_file(&dir, "m2.json", &["m2", "--c1", "0.3", "--c2", "0.8"]);
    let out = qdsm(&["analyze", s(&f), "--json"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["channel"]["unital"], true);
    assert_eq!(v["channel"]["trace_preserving"], false);
    assert_eq!(v["extremality"]["cp"]["extremal"], true);
    assert!(v["extremality"]["cp_phi"].is_null());
    assert!(v["spectral"].is_null());
}

#[test]
fn malformed_inputs() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"dim\": 2, \"kraus\": [[[1, 0]]]}").unwrap();
    assert_eq!(qdsm(&["analyze", s(&bad)]).status.code(), Some(1));
    std::fs::write(&bad, "not json").unwrap();
    assert_eq!(qdsm(&["analyze", s(&bad)]).status.code(), Some(1));
    assert_eq!(qdsm(&["analyze", "/nonexistent/channel.json"]).status.code(), Some(1));
    assert_eq!(qdsm(&["face-scan", "--step", "1.5"]).status.code(), Some(1));
}

#[test]
fn classify_swap_reports_projections() {
    let dir = TempDir::new().unwrap();
    let f = example_file(&dir, "swap.json", &["swap"]);
    let out = qdsm(&["classify", s(&f), "--json"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["fixed_dim"], 2);
    assert_eq!(v["ergodic"], false);
    assert_eq!(v["projections"].as_array().map(Vec::len), Some(2));
}

#[test]
fn face_scan_csv() {
    let out = qdsm(&["face-scan", "--step", "0.5", "--json"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("x1,x2,x3"));
    assert_eq!(lines.count(), 125);
    assert!(csv.contains("1,1,1,boundary"));
}
