//! End-to-end runs of the `weylpair` binary.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, Output};

use weylpair::cli::parse_problem;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_weylpair"))
}

fn scratch(name: &str, content: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("weylpair-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows as `(column -> value)` lookups.
fn rows(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let head: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    (head, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn col(head: &[String], row: &[String], name: &str) -> f64 {
    let i = head.iter().position(|h| h == name).unwrap();
    row[i].parse().unwrap()
}

const FREE0: &str = r#"{"potential": {"kind": "zero"}, "alpha": {"re": 0, "im": 0}}"#;

#[test]
fn mfunc_free_neumann_at_i() {
    let p = scratch("free0.json", FREE0);
    let o = run(&["mfunc", "--problem", p.to_str().unwrap(), "--grid", "0:1:2"]);
    assert_eq!(o.status.code(), Some(0));
    let (head, data) = rows(&stdout(&o));
    assert_eq!(data.len(), 2);
    // e^{-i pi/4} (i P+ - P-) = [[i, 1], [1, i]] / sqrt 2
    let s = 0.5f64.sqrt();
    let r = &data[0];
    assert_eq!(col(&head, r, "im_lambda"), 1.0);
    for (name, want) in [
        ("m11_re", 0.0),
        ("m11_im", s),
        ("m12_re", s),
        ("m12_im", 0.0),
        ("m21_re", s),
        ("m22_im", s),
    ] {
        assert!((col(&head, r, name) - want).abs() < 1e-9, "{name}");
    }
    assert_eq!(r.last().unwrap(), "ok");
}

#[test]
fn config_errors_exit_1() {
    let p = scratch("free0b.json", FREE0);
    let ps = p.to_str().unwrap();
    assert_eq!(run(&["mfunc", "--problem", ps, "--grid", "0:1:1"]).status.code(), Some(1));
    assert_eq!(run(&["mfunc", "--problem", ps, "--grid", "1:0:5"]).status.code(), Some(1));
    assert_eq!(run(&["mfunc", "--problem", ps, "--grid", "0:1:5", "--eta", "0"]).status.code(), Some(1));
    assert_eq!(run(&["mfunc", "--problem", "/nonexistent.json", "--grid", "0:1:2"]).status.code(), Some(1));
    let bad = scratch("bad.json", r#"{"potential": {"kind": "zero"}}"#);
    assert_eq!(
        run(&["pair", "--problem", bad.to_str().unwrap(), "--grid", "1:2:2"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["mfunc", "--problem", ps]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn no_convergence_rows_are_flagged() {
    let p = scratch(
        "short.json",
        r#"{"potential": {"kind": "zero"}, "alpha": "inf", "truncation": {"b_min": 1, "b_max": 2, "growth": 1.5}}"#,
    );
    let o = run(&["mfunc", "--problem", p.to_str().unwrap(), "--grid", "1:2:2", "--eta", "0.001"]);
    assert_eq!(o.status.code(), Some(2));
    let (_, data) = rows(&stdout(&o));
    assert!(data.iter().all(|r| r.last().unwrap() == "no_convergence"));
    assert!(data.iter().all(|r| r[2] == "NaN"));
}

#[test]
fn pair_free_robin_has_the_atom() {
    let p = scratch("free1.json", r#"{"potential": {"kind": "zero"}, "alpha": {"re": 1, "im": 0}}"#);
    let o = run(&["pair", "--problem", p.to_str().unwrap(), "--grid", "0.5:2:4"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let atoms: Vec<Vec<f64>> = out
        .lines()
        .filter(|l| l.starts_with("# atom,") && !l.contains("location"))
        .map(|l| l.split(',').skip(1).map(|t| t.parse().unwrap()).collect())
        .collect();
    assert_eq!(atoms.len(), 1);
    let a = &atoms[0];
    assert!((a[0] - 1.0).abs() < 1e-6 && (a[1] - 2.0).abs() < 1e-3 && (a[2] + 1.0).abs() < 1e-3 && a[3].abs() < 1e-3);
    let (head, data) = rows(&out);
    assert_eq!(head, ["s", "nu_density", "psi_re", "psi_im", "err_est", "flag"]);
    assert_eq!(data.len(), 4);
    assert_eq!(data[1].last().unwrap(), "excluded");
}

#[test]
fn pair_free_dirichlet_and_complex_robin() {
    let p = scratch("freeinf.json", r#"{"potential": {"kind": "zero"}, "alpha": "inf"}"#);
    let o = run(&["pair", "--problem", p.to_str().unwrap(), "--grid", "1:9:3"]);
    assert_eq!(o.status.code(), Some(0));
    let (head, data) = rows(&stdout(&o));
    for r in &data {
        let err = col(&head, r, "err_est");
        assert!((col(&head, r, "psi_re") - 1.0).abs() <= err + 1e-9);
        assert!(col(&head, r, "psi_im").abs() <= err + 1e-9);
    }
    let p = scratch("free1i.json", r#"{"potential": {"kind": "zero"}, "alpha": {"re": 1, "im": 1}}"#);
    let o = run(&["pair", "--problem", p.to_str().unwrap(), "--grid", "2:4:2", "--format", "csv"]);
    let (head, data) = rows(&stdout(&o));
    let r = &data[1];
    assert!((col(&head, r, "nu_density") - 1.5 / PI).abs() < 1e-4);
    assert!((col(&head, r, "psi_im") + 1.0).abs() < 1e-3 && col(&head, r, "psi_re").abs() < 1e-3);
}

#[test]
fn csv_is_bit_stable_and_job_count_independent() {
    let p = scratch(
        "ed.json",
        r#"{"potential": {"kind": "exp_decay", "amplitude": {"re": 1, "im": 1}, "rate": 1}, "alpha": {"re": 0.5, "im": 0}}"#,
    );
    let ps = p.to_str().unwrap();
    let a = run(&["mfunc", "--problem", ps, "--grid", "-3:3:7", "--jobs", "1"]);
    let b = run(&["mfunc", "--problem", ps, "--grid", "-3:3:7", "--jobs", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(!text.contains('\r'));
    let (_, data) = rows(&text);
    // 17 significant digits in exponent form
    let mantissa = data[0][2].split('e').next().unwrap();
    assert_eq!(mantissa.trim_start_matches('-').replace('.', "").len(), 17);
}

#[test]
fn json_output_round_trips_the_problem() {
    let text = r#"{"potential": {"kind": "sum", "terms": [{"kind": "exp_decay", "amplitude": {"re": 1, "im": 0}, "rate": 1},
        {"kind": "constant", "value": {"re": 0, "im": 2}}]}, "alpha": {"re": 0, "im": 0}}"#;
    let p = scratch("sum.json", text);
    let out = scratch("out.json", "");
    let o = run(&[
        "mfunc",
        "--problem",
        p.to_str().unwrap(),
        "--grid",
        "0:1:2",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["command"], "mfunc");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
    let echoed = parse_problem(&doc["problem"].to_string()).unwrap();
    assert_eq!(echoed, parse_problem(text).unwrap());
}

#[test]
fn atoms_and_asympt_commands() {
    let p = scratch("free2.json", r#"{"potential": {"kind": "zero"}, "alpha": {"re": 2, "im": 0}}"#);
    let o = run(&["atoms", "--problem", p.to_str().unwrap(), "--grid", "0.5:6:2"]);
    assert_eq!(o.status.code(), Some(0));
    let (head, data) = rows(&stdout(&o));
    assert_eq!(data.len(), 1);
    assert!((col(&head, &data[0], "location") - 4.0).abs() < 1e-8);
    assert!((col(&head, &data[0], "mass") - 10.0).abs() < 1e-6);
    assert_eq!(data[0].last().unwrap(), "ok");

    let p = scratch("free0c.json", FREE0);
    let o = run(&["asympt", "--problem", p.to_str().unwrap(), "--grid", "50:100:2"]);
    assert_eq!(o.status.code(), Some(0));
    let (head, data) = rows(&stdout(&o));
    assert_eq!(data.len(), 4);
    for r in &data {
        assert!((col(&head, r, "ratio11") - 1.0 / PI).abs() < 1e-6);
    }
}

#[test]
fn check_suite_and_negative_control() {
    let o = run(&["check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains(",fail,"));
    let p = scratch(
        "edc.json",
        r#"{"potential": {"kind": "exp_decay", "amplitude": {"re": 1, "im": 1}, "rate": 1}, "alpha": {"re": 0, "im": 0}}"#,
    );
    let o = run(&["check", "--problem", p.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(&["check", "--flip-k-branch"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).lines().any(|l| l.starts_with("herglotz,fail")));
}
