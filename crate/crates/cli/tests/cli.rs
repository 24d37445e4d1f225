use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn tangles(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tangles")).args(args).current_dir(dir).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write_state(dir: &Path, name: &str, family: &str, params: &str) -> PathBuf {
    let out = tangles(dir, &["state", family, "--params", params, "--out", name]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir.join(name)
}

fn value(report: &Value, key: &str) -> f64 {
    report["entries"][key]["value"].as_f64().unwrap_or_else(|| panic!("missing {key}"))
}

#[test]
fn ghz_report_has_eighteen_entries() {
    let dir = tempfile::tempdir().unwrap();
    write_state(dir.path(), "ghz.json", "ghz", "");
    let out = tangles(dir.path(), &["measure", "ghz.json", "--format", "json", "--samples", "4"]);
    assert!(out.status.success());
    let rep = json(&out);
    let entries = rep["entries"].as_object().unwrap();
    assert_eq!(entries.len(), 18);
    for (k, e) in entries {
        let want = if k == "fourtangle" { 1.0 } else { 0.0 };
        assert!((e["value"].as_f64().unwrap() - want).abs() < 1e-10, "{k}");
    }
    assert_eq!(rep["entries"]["phi_ABC"]["provenance"], "optimizer");
    assert_eq!(rep["entries"]["phi_ABC"]["restarts"], 4);
    assert_eq!(rep["entries"]["phi_ABC"]["seed"], 0xC0FFEE);
}

#[test]
fn w3_tripartite_values() {
    let dir = tempfile::tempdir().unwrap();
    write_state(dir.path(), "w3.json", "w3", "");
    let rep = json(&tangles(dir.path(), &["measure", "w3.json", "--set", "tripartite", "--format", "json"]));
    assert!((value(&rep, "i5") - 2.0 / 9.0).abs() < 1e-12);
    assert!((value(&rep, "phi_ABC") - 136.0 / 3.0).abs() < 1e-10);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\"dims\": [2, 2], \"amps\": [[1, 0]]").unwrap();
    std::fs::write(dir.path().join("short.json"), r#"{"dims":[2,2],"amps":[[1,0]],"normalized":true}"#).unwrap();
    write_state(dir.path(), "w3.json", "w3", "");
    let cases: [&[&str]; 8] = [
        &["measure", "bad.json"],
        &["measure", "short.json"],
        &["measure", "w3.json", "--set", "quadripartite"],
        &["state", "nonesuch"],
        &["state", "double_bell", "--params", "a=1,b=1"],
        &["replica", "w3.json", "id;(12)"],
        &["verify", "everything"],
        &["cft", "--c", "1", "--z1", "0", "--z2", "0", "--z3", "1"],
    ];
    for args in cases {
        let out = tangles(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn verify_suites_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = tangles(dir.path(), &["verify", "table2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = json(&out);
    let checks = rep["suites"][0]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 9);
    assert!(checks.iter().all(|c| c["count"] == 20 && c["passed"] == true));

    let rep = json(&tangles(dir.path(), &["verify", "bounds", "--samples", "100000", "--format", "json"]));
    let b = &rep["suites"][0]["bounds"];
    assert!((b["i5"]["extremum"].as_f64().unwrap() - 2.0 / 9.0).abs() < 1e-12);
    assert!((b["phi"]["extremum"].as_f64().unwrap() - 11.0 / 4.0).abs() < 1e-12);
    assert_eq!(b["i5"]["samples"], 100000);
    assert_eq!(b["i5"]["seed"], 0xC0FFEE);

    let rep = json(&tangles(dir.path(), &["verify", "identities", "--samples", "50", "--format", "json"]));
    let i5 = rep["suites"][0]["checks"].as_array().unwrap().iter().find(|c| c["name"] == "i5_pt_vs_replica_qubits").unwrap();
    assert!(i5["worst"].as_f64().unwrap() < 1e-10);

    let out = tangles(dir.path(), &["verify", "gour", "--samples", "10", "--tol", "1e-40"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL] gour"));
}

#[test]
fn verify_is_reproducible_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str| tangles(dir.path(), &["verify", "wootters", "--samples", "5", "--seed", seed, "--format", "json"]).stdout;
    assert_eq!(run("0xC0FFEE"), run("12648430"));
    assert_ne!(run("1"), run("2"));
}

#[test]
fn replica_examples() {
    let dir = tempfile::tempdir().unwrap();
    write_state(dir.path(), "prod.json", "ghz", "q=2,a=1,b=0");
    write_state(dir.path(), "ghz3.json", "ghz", "q=3");
    let rep = json(&tangles(dir.path(), &["replica", "prod.json", "id;(12)", "--format", "json"]));
    assert!((rep["abs_z"].as_f64().unwrap() - 1.0).abs() < 1e-14);
    assert_eq!(rep["product"], true);
    let rep = json(&tangles(dir.path(), &["replica", "ghz3.json", "id;(123);(132)", "--format", "json"]));
    assert!((rep["abs_z"].as_f64().unwrap() - 0.25).abs() < 1e-14);
    let out = tangles(dir.path(), &["replica", "ghz3.json", "id;(1234567);(132)"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("guard"));
    let out = tangles(dir.path(), &["replica", "ghz3.json", "id;(12", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn state_files_round_trip_through_out() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_state(dir.path(), "g1.json", "g1", "a=1,b=2i,c=3,d=-1");
    let raw = tangles(dir.path(), &["state", "g1", "--params", "a=1,b=2i,c=3,d=-1", "--raw"]);
    let text = std::fs::read_to_string(path).unwrap();
    let normalized = tangles::qstate::state_from_json::<f64>(&text).unwrap();
    let raw = tangles::qstate::state_from_json::<f64>(std::str::from_utf8(&raw.stdout).unwrap()).unwrap();
    assert!((normalized.norm() - 1.0).abs() < 1e-14);
    assert!(raw.norm() > 1.5);
    assert!(normalized.fidelity_deficit(&raw.to_normalized()) < 1e-14);
}

#[test]
fn cft_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let rep = json(&tangles(dir.path(), &["cft", "--c", "9", "--z1", "-1", "--z2", "0.5", "--z3", "2", "--eps", "0.1", "--format", "json"]));
    assert!((rep["twist_dimension"].as_f64().unwrap() - 2.0).abs() < 1e-14);
    assert!((rep["ln_ope"].as_f64().unwrap() - 3.0 * 0.75f64.ln()).abs() < 1e-12);
    let out = tangles(dir.path(), &["cft", "--c", "1", "--z1", "0", "--z2", "1", "--z3", "2", "--sweep", "eps", "--from", "0.5", "--to", "1", "--steps", "3"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 4);
    let out = tangles(dir.path(), &["cft", "--c", "1", "--z1", "0", "--z2", "1", "--z3", "2", "--sweep", "eps"]);
    assert_eq!(out.status.code(), Some(2));
}
