//! End-to-end checks of the `hswitch` binary: outputs, manifests and exit codes.

use std::process::{Command, Output};

use serde_json::Value;

fn hswitch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hswitch"))
        .args(args)
        .env_remove("HSWITCH_CONFIG")
        .output()
        .expect("binary runs")
}

#[test]
fn crossings_csv_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("crossings.csv");
    let o = hswitch(&["--format", "csv", "--out", out.to_str().unwrap(), "crossings", "--k", "6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,a_k,residual"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    let a1: f64 = rows[0].split(',').nth(1).unwrap().parse().unwrap();
    assert!(((a1 - (-std::f64::consts::PI).exp()) / a1).abs() < 1e-10);

    let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("crossings.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "crossings");
    assert_eq!(m["precision"], "binary64");
    assert_eq!(m["format"], "csv");
    let digest = m["output_digests"][out.to_str().unwrap()].as_str().unwrap();
    assert_eq!(digest, hswitch::records::sha256_hex(text.as_bytes()));
    assert_eq!(m["config"]["spectrum"]["c"], 2.0);
}

#[test]
fn jsonl_to_stdout_and_explicit_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mp = dir.path().join("m.json");
    let o = hswitch(&["--manifest", mp.to_str().unwrap(), "realize", "--path", "121"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = hswitch::records::parse_jsonl(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    assert!(!recs.is_empty());
    let m: Value = serde_json::from_str(&std::fs::read_to_string(&mp).unwrap()).unwrap();
    assert_eq!(m["command"], "realize");
    assert!(m["output_digests"]["stdout"].is_string());
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[spectrum]\nc = 3.0\n").unwrap();
    let o = hswitch(&["--config", cfg.to_str().unwrap(), "map", "--x", "0", "--y", "0.1"]);
    assert!(o.status.success());
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((r["r"].as_f64().unwrap() - 1e-3).abs() < 1e-15);
    let o = hswitch(&["--config", cfg.to_str().unwrap(), "--c", "2", "map", "--x", "0", "--y", "0.1"]);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((r["r"].as_f64().unwrap() - 1e-2).abs() < 1e-15);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[transition]\na = [[1.0, 2.0], [2.0, 4.0]]\n").unwrap();

    assert_eq!(hswitch(&["no-such-command"]).status.code(), Some(2));
    let o = hswitch(&["--config", bad.to_str().unwrap(), "crossings"]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(err.to_string().contains("transition.a"), "{err}");

    // Hypothesis violation: weak contraction without the contrast flag.
    assert_eq!(hswitch(&["--c", "1", "--e", "2", "crossings"]).status.code(), Some(4));
    // Input on the stable manifold is a model error.
    assert_eq!(hswitch(&["map", "--x", "0", "--y", "0"]).status.code(), Some(5));
    // Crossings beyond the binary64 range exhaust the precision.
    assert_eq!(hswitch(&["crossings", "--k", "400"]).status.code(), Some(3));
}

#[test]
fn seeded_audit_is_byte_identical() {
    let run = || hswitch(&["--seed", "11", "audit-stability", "--samples", "300"]).stdout;
    let (a, b) = (run(), run());
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let other = hswitch(&["--seed", "12", "audit-stability", "--samples", "300"]).stdout;
    assert_ne!(a, other);
}
