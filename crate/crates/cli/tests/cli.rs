use std::path::Path;
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, command: &str, config: &str, extra: &[&str]) -> (i32, Option<Value>) {
    let cfg = dir.join(format!("{command}.json"));
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_lcslab"))
        .arg(command)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    let report = out.join(format!("{}_report.json", command.replace('-', "_")));
    let envelope = std::fs::read_to_string(report).ok().map(|t| serde_json::from_str(&t).unwrap());
    (status.status.code().unwrap(), envelope)
}

/// Re-derives every pass flag from the stored value, tolerance and target.
fn recompute(env: &Value) -> bool {
    env["checks"].as_array().unwrap().iter().all(|c| {
        let (v, tol) = (c["value"].as_f64().unwrap(), c["tolerance"].as_f64().unwrap());
        let pass = match c["comparison"].as_str().unwrap() {
            "at-most" => v <= tol,
            "at-least" => v >= tol,
            "near" => (v - c["target"].as_f64().unwrap()).abs() <= tol,
            other => panic!("comparison {other}"),
        };
        pass == c["pass"].as_bool().unwrap()
    })
}

#[test]
fn example_reproduces_zero_energy_family() {
    let dir = TempDir::new().unwrap();
    let (code, env) = run(dir.path(), "example", r#"{"schema_version": 1}"#, &[]);
    let env = env.unwrap();
    assert_eq!(code, 0);
    assert!(env["results"]["energy"]["e_total"].as_f64().unwrap() <= 1e-8);
    assert_eq!(env["results"]["energy"]["charge_class"], serde_json::json!([1]));
    assert!(env["pass"].as_bool().unwrap() && recompute(&env));
    let nodes = std::fs::read_to_string(dir.path().join("out/example_nodes.csv")).unwrap();
    let mut lines = nodes.lines();
    assert_eq!(lines.next().unwrap(), "# domain kind=cylinder half_length=5 n_tau=128 n_t=64");
    assert_eq!(lines.next().unwrap(), "i,j,tau,t,x1,y1,x2,y2,f,r1,r2");
    assert_eq!(lines.count(), 129 * 64);
    assert!(dir.path().join("out/example_residual.svg").exists());
}

#[test]
fn index_closed_case() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"schema_version": 1, "params": {"index": {"n": 2, "g": 0, "s_plus": 0, "s_minus": 0}}}"#;
    let (code, env) = run(dir.path(), "index", cfg, &[]);
    assert_eq!(code, 0);
    assert_eq!(env.unwrap()["results"]["full_index"], 4);
}

#[test]
fn rotation_cz() {
    let dir = TempDir::new().unwrap();
    let (code, env) = run(dir.path(), "cz", r#"{"schema_version": 1, "params": {"theta": 1.7}}"#, &[]);
    assert_eq!(code, 0);
    assert_eq!(env.unwrap()["results"]["cz"]["index"], 3);
}

#[test]
fn failed_check_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"schema_version": 1, "tolerances": {"residual_sup": 1e-6}}"#;
    let (code, env) = run(dir.path(), "example", cfg, &[]);
    let env = env.unwrap();
    assert_eq!(code, 2);
    assert!(!env["pass"].as_bool().unwrap() && recompute(&env));
}

#[test]
fn invalid_configs_exit_with_one() {
    let dir = TempDir::new().unwrap();
    for cfg in [
        r#"{"schema_version": 1, "unknown": true}"#,
        r#"{"schema_version": 3}"#,
        r#"{"schema_version": 1, "tolerances": {"not_a_check": 1.0}}"#,
        r#"{"schema_version": 1, "model": {"kind": "ellipsoid-s3", "a": -1.0, "b": 1.0}}"#,
        "not json",
    ] {
        let (code, env) = run(dir.path(), "example", cfg, &[]);
        assert_eq!(code, 1, "{cfg}");
        assert!(env.is_none());
    }
    let (code, _) = run(dir.path(), "example", r#"{"schema_version": 1, "model": {"kind": "standard-r3"}}"#, &[]);
    assert_eq!(code, 1);
}

#[test]
fn reports_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"schema_version": 1, "domain": {"kind": "torus", "half_length": 1.0, "n_tau": 24, "n_t": 24}}"#;
    let (c1, a) = run(dir.path(), "solve", cfg, &["--seed", "4"]);
    let (c2, b) = run(dir.path(), "solve", cfg, &["--seed", "4"]);
    let (a, b) = (a.unwrap(), b.unwrap());
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a["results"], b["results"]);
    assert_eq!(a["checks"], b["checks"]);
    assert_eq!(a["seed"], 4);
    let (_, c) = run(dir.path(), "solve", cfg, &["--seed", "5"]);
    assert_ne!(a["results"]["start"], c.unwrap()["results"]["start"]);
}

#[test]
fn every_command_runs_on_defaults() {
    let dir = TempDir::new().unwrap();
    let ell = r#"{"schema_version": 1, "model": {"kind": "ellipsoid-s3", "a": 1.0, "b": 1.3}}"#;
    for (cmd, cfg) in [
        ("verify-frames", ell),
        ("energy", r#"{"schema_version": 1, "params": {"actions_plus": [3.14]}}"#),
        ("decompose", r#"{"schema_version": 1}"#),
        ("charges", r#"{"schema_version": 1, "params": {"k": 1, "nu": 0}}"#),
        ("orbits", ell),
        ("cz", ell),
        ("spectrum", ell),
        ("linearize-check", r#"{"schema_version": 1, "params": {"linearize": {"n": 128}}}"#),
    ] {
        let (code, env) = run(dir.path(), cmd, cfg, &[]);
        let env = env.unwrap_or_else(|| panic!("{cmd} wrote no report"));
        assert_eq!(code, 0, "{cmd}: {}", env["checks"]);
        assert!(recompute(&env), "{cmd}");
        assert_eq!(env["command"], cmd);
    }
}
