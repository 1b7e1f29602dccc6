// Copyright 2026 The qps Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qps_core::qpstate::{canonical_state, QpsState, ScaleConfig};
use qps_core::sympgroup::{fourier_lct, LctMatrix, Signature};
use serde_json::Value;

fn qps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qps"))
        .args(args)
        .env_remove("QPS_SEED")
        .output()
        .expect("qps binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_comment(text: &str, key: &str) -> String {
    let prefix = format!("# {key}=");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("missing {key}"))
        .to_string()
}

#[test]
fn verify_report_lists_every_check() {
    let o = qps(&["verify", "--trials", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["overall_pass"], true);
    assert_eq!(report["config"]["trials"], 20);
    assert_eq!(report["config"]["L"], 2.0);
    assert!(report["version"].is_string());
    let names: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    for expected in [
        "symplectic_membership",
        "gamma_invariance",
        "inverse_closed_form_identity",
        "saturation",
        "gaussian_uncertainty_product",
        "two_path_gamma",
        "duality_residual_p",
    ] {
        assert!(names.contains(&expected), "missing {expected}");
    }
}

#[test]
fn sabotaged_tolerance_reports_measured_errors() {
    let o = qps(&["verify", "--trials", "10", "--tol", "1e-18"]);
    assert_eq!(o.status.code(), Some(1));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["overall_pass"], false);
    let failing = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .count();
    assert!(failing > 0);
    assert!(stderr(&o).contains("FAIL"));
}

#[test]
fn invalid_configuration_exits_two() {
    let o = qps(&["verify", "--ell", "3", "--L", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("InvalidScales: L must be ≥ ell"));
    assert!(o.stdout.is_empty());
    assert_eq!(qps(&["verify", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(qps(&["verify", "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(qps(&["verify", "--hbar", "0"]).status.code(), Some(2));
}

#[test]
fn sweep_ell_converges_at_first_order() {
    let o = qps(&[
        "sweep", "ell", "--kappa", "1", "--L", "1", "--points", "5", "--min", "1e-6", "--max",
        "1e-2", "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("scale,residual\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 6);
    let order: f64 = csv_comment(&text, "fitted_order").parse().unwrap();
    assert!((order - 1.0).abs() < 0.1, "order {order}");
    let last: f64 = csv_comment(&text, "final_residual").parse().unwrap();
    assert!(last <= 1e-5);
}

#[test]
fn sweep_l_converges_in_inverse_l() {
    let o = qps(&[
        "sweep", "L", "--lambda", "1", "--ell", "1", "--points", "5", "--min", "1e2", "--max",
        "1e6",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let order = report["fitted_order"].as_f64().unwrap();
    assert!((order - 1.0).abs() < 0.1);
    assert_eq!(report["config"]["sweep"], "L");
    assert_eq!(report["points"].as_array().unwrap().len(), 5);
}

#[test]
fn sweep_rejects_inverted_range() {
    let o = qps(&["sweep", "ell", "--min", "1e-2", "--max", "1e-6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("min < max"));
    assert_eq!(
        qps(&["sweep", "ell", "--points", "1"]).status.code(),
        Some(2)
    );
}

#[test]
fn sweep_with_no_real_root_is_a_configuration_error() {
    // κ beyond L·ħ/(2ℓ²) at the largest ℓ leaves the conic
    let o = qps(&[
        "sweep", "ell", "--kappa", "1e6", "--L", "1", "--min", "1e-3", "--max", "1e-1",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn sample_evenly_spaced_states_sit_on_the_conic() {
    let o = qps(&["sample", "--count", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    for (k, line) in lines.iter().enumerate() {
        let theta = line["theta"].as_f64().unwrap();
        assert!((theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).abs() < 1e-15);
        assert!((line["gamma"].as_f64().unwrap() - 16.0).abs() < 1e-12);
        let state = QpsState::from_json_str(&line["state"].to_string()).unwrap();
        assert_eq!(state.mean().p[4], line["kappa"].as_f64().unwrap());
    }
}

#[test]
fn sample_at_theta_zero_is_the_reference_state() {
    let o = qps(&["sample", "--count", "1"]);
    let line: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(line["kappa"], 1.0);
    assert_eq!(line["lambda"], 0.0);
    assert_eq!(
        line["state"]["mean_p"],
        serde_json::json!([0.0, 0.0, 0.0, 0.0, 1.0])
    );
    assert_eq!(
        line["state"]["mean_x"],
        serde_json::json!([0.0, 0.0, 0.0, 0.0, 0.0])
    );
}

#[test]
fn sample_is_deterministic_under_seed_and_env() {
    let a = qps(&[
        "sample",
        "--count",
        "4",
        "--theta-policy",
        "random",
        "--seed",
        "9",
    ]);
    let b = Command::new(env!("CARGO_BIN_EXE_qps"))
        .args(["sample", "--count", "4", "--theta-policy", "random"])
        .env("QPS_SEED", "9")
        .output()
        .unwrap();
    let c = qps(&[
        "sample",
        "--count",
        "4",
        "--theta-policy",
        "random",
        "--seed",
        "10",
    ]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(qps(&["sample", "--count", "0"]).status.code(), Some(2));
}

#[test]
fn out_flag_writes_the_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sample.csv");
    let o = qps(&[
        "sample",
        "--count",
        "2",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("index,theta,kappa,lambda,gamma,scaled_lhs\n"));
    assert_eq!(text.lines().count(), 3);
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn desk_state(kappa: f64, lambda: f64) -> QpsState {
    canonical_state(Signature::de_sitter(), &ScaleConfig::desk(), kappa, lambda).unwrap()
}

#[test]
fn transform_by_identity_keeps_the_state() {
    let dir = tempfile::tempdir().unwrap();
    let state = desk_state(1.0, 0.0);
    let s = write(dir.path(), "state.json", &state.to_json_string());
    let lct = LctMatrix::identity(Signature::de_sitter()).to_json_string(&ScaleConfig::desk());
    let m = write(dir.path(), "lct.json", &lct);
    let o = qps(&["transform", &s, &m]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let mut expected = state.to_json_value();
    expected["provenance"] = "Transformed".into();
    for key in ["mean_p", "mean_x", "cov", "hbar", "ell", "L"] {
        assert_eq!(out[key], expected[key], "{key}");
    }
    assert!(out["comment"].as_str().unwrap().contains("gamma_before="));
}

#[test]
fn transform_by_fourier_swaps_the_axis_pair() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "state.json",
        &desk_state(0.0, 2.0).to_json_string(),
    );
    let lct = fourier_lct(Signature::de_sitter(), 1.0)
        .unwrap()
        .to_json_string(&ScaleConfig::desk());
    let m = write(dir.path(), "lct.json", &lct);
    let o = qps(&["transform", &s, &m]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = QpsState::from_json_str(&stdout(&o)).unwrap();
    assert_eq!(out.mean().p[4], 2.0);
    assert_eq!(out.mean().x[4], 0.0);
    let sigma = out.cov().matrix();
    assert!((sigma[(4, 4)] - 4.0).abs() < 1e-12);
    assert!((sigma[(9, 9)] - 1.0).abs() < 1e-12);
    assert!((sigma[(4, 9)] + 1.936492).abs() < 1e-6);
}

#[test]
fn transform_membership_gate_and_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "state.json",
        &desk_state(1.0, 0.0).to_json_string(),
    );
    let mut rows: Value =
        LctMatrix::identity(Signature::de_sitter()).to_json_value(&ScaleConfig::desk());
    rows["m"][0][0] = (1.0 + 1e-3).into();
    let bad = write(dir.path(), "bad.json", &rows.to_string());
    let o = qps(&["transform", &s, &bad]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("NotSymplectic"));

    let junk = write(dir.path(), "junk.json", "{\"n_plus\": 1");
    assert_eq!(qps(&["transform", &junk, &bad]).status.code(), Some(2));
    assert_eq!(qps(&["transform", &s, &junk]).status.code(), Some(2));
    let missing = dir.path().join("absent.json");
    assert_eq!(
        qps(&["transform", &s, missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let id = write(
        dir.path(),
        "id.json",
        &LctMatrix::identity(Signature::de_sitter()).to_json_string(&ScaleConfig::desk()),
    );
    assert_eq!(
        qps(&["transform", &s, &id, "--format", "csv"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn gaussian_oracle_reproduces_the_canonical_axis() {
    let o = qps(&["gaussian"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["overall_pass"], true);
    let var_x = report["quadrature"]["var_x"].as_f64().unwrap();
    let var_p = report["quadrature"]["var_p"].as_f64().unwrap();
    assert!((var_x - 4.0).abs() < 1e-8 * 4.0);
    assert!((var_p - 1.0).abs() < 1e-8);
}

#[test]
fn gaussian_rejects_bad_quadrature_settings() {
    assert_eq!(qps(&["gaussian", "--nodes", "8"]).status.code(), Some(2));
    assert_eq!(qps(&["gaussian", "--x-var", "-1"]).status.code(), Some(2));
    let o = qps(&["gaussian", "--p-mean", "1e9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("QuadratureNotConverged"));
}
