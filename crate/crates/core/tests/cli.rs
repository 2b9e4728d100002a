use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn molqa(args: &[&str], out_env: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_molqa"));
    cmd.args(args).env_remove("MOLQA_OUT_DIR");
    if let Some(p) = out_env {
        cmd.env("MOLQA_OUT_DIR", p);
    }
    cmd.output().expect("binary runs")
}

fn run_ok(args: &[&str]) {
    let o = molqa(args, None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

fn write_config(dir: &TempDir, name: &str, json: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, json).unwrap();
    p.to_string_lossy().into_owned()
}

fn error_record(o: &Output) -> Value {
    serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).expect("JSON error record")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn spectrum_writes_levels_and_crossing() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("spectrum");
    run_ok(&["spectrum", "--out", out.to_str().unwrap()]);
    let csv = read(&out, "spectrum.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("E_kV_cm,state_index,label,energy_Hz"));
    assert_eq!(csv.lines().count(), 1 + 201 * 5);
    assert!(!csv.contains('\r'));
    let labels: Vec<&str> = csv.lines().skip(1).take(5).map(|l| l.split(',').nth(2).unwrap()).collect();
    for l in ["alpha", "beta", "gamma"] {
        assert!(labels.contains(&l), "{labels:?}");
    }
    let crossing = read(&out, "crossing.csv");
    let e: f64 = crossing.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((e - 1.18).abs() < 0.03, "{e}");
    let svg = read(&out, "spectrum.svg");
    assert_eq!(svg.matches("<polyline").count(), 5);
    assert!(svg.contains(r#"viewBox="0 0 800 600""#));
    let manifest = read(&out, "manifest");
    assert!(manifest.contains("command = spectrum"));
    assert!(manifest.contains("[constants]"));
    assert!(manifest.contains("\"B_mT\": 538.0"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        run_ok(&["anneal", "--seedless", "--out", d.to_str().unwrap()]);
    }
    for name in ["summary.csv", "trajectory_T15ms.csv", "final_T15ms.csv", "final_T15ms.svg", "manifest"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn two_qubit_anneal_artifacts() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("an");
    run_ok(&["anneal", "--out", out.to_str().unwrap()]);
    let dist = read(&out, "final_T15ms.csv");
    let rows: Vec<&str> = dist.lines().collect();
    assert_eq!(rows[0], "qubit_bitstring_or_INVALID,probability");
    assert_eq!(rows.len(), 1 + 4 + 1);
    assert!(rows[5].starts_with("INVALID,"));
    let total: f64 = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
    // 4 outcomes, grouped invalid mass, 2 invalid strings, frame, legend
    let svg = read(&out, "final_T15ms.svg");
    assert_eq!(svg.matches("<rect x=").count(), 4 + 1 + 2 + 1 + 1);
    let traj = read(&out, "trajectory_T15ms.csv");
    assert_eq!(traj.lines().next(), Some("s,t_ms,p_solution,p_invalid,p_valid_other"));
    assert_eq!(traj.lines().count(), 1 + 201);
    assert_eq!(read(&out, "ising_edges.csv").lines().next(), Some("qubit_a,qubit_b,J_Hz"));
    assert_eq!(read(&out, "ising_bias.csv").lines().next(), Some("qubit,h_Hz"));
    let params = read(&out, "parameters.csv");
    let first: Vec<f64> = params.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((first[2] / -1034.3 - 1.0).abs() < 0.05, "{first:?}");
    let summary = read(&out, "summary.csv");
    assert!(summary.lines().nth(1).unwrap().contains(",10 01,"), "{summary}");
}

#[test]
fn couplings_cover_both_molecules() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("c");
    run_ok(&["couplings", "--out", out.to_str().unwrap()]);
    let csv = read(&out, "couplings.csv");
    assert_eq!(
        csv.lines().next(),
        Some("E_kV_cm,B_mT,R_nm,theta_rad,J_perp_Hz,J_z_Hz,W_Hz,K_Hz,V_Hz")
    );
    assert_eq!(csv.lines().count(), 1 + 2 * 121);
    for f in ["couplings_0.svg", "couplings_1.svg"] {
        assert_eq!(read(&out, f).matches("<polyline").count(), 2);
    }
}

#[test]
fn out_dir_from_environment() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "s.json", r#"{"experiment": "stack_3d"}"#);
    let target = tmp.path().join("env_out");
    let o = molqa(&["stack3d", "--config", &cfg], Some(&target));
    assert!(o.status.success());
    let csv = read(&target, "stack3d.csv");
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[6], 0.0);
    assert_eq!(last[5], -last[7]);
    assert!(last[3] > 0.0 && last[4] < 0.0);
}

#[test]
fn config_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("x");
    for (json, needle) in [
        (r#"{"experiment": "two_qubit", "pair": {"R_nm": -3}}"#, "R_nm"),
        (r#"{"experiment": "two_qubit", "fields": {"B_T": 0.6}}"#, "unit-suffix mismatch"),
        (r#"{"experiment": "two_qubit", "shots": 5}"#, "shots"),
        (r#"{"experiment": "scan"}"#, "not `anneal`"),
        ("{\"experiment\": ", "invalid JSON"),
    ] {
        let cfg = write_config(&tmp, "bad.json", json);
        let o = molqa(&["anneal", "--config", &cfg, "--out", out.to_str().unwrap()], None);
        assert_eq!(o.status.code(), Some(2), "{json}");
        let rec = error_record(&o);
        assert_eq!(rec["kind"], "config");
        assert_eq!(rec["exit_code"], 2);
        assert!(rec["message"].as_str().unwrap().contains(needle), "{rec}");
    }
    let o = molqa(&["anneal", "--config", "/nonexistent/run.json"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn size_ceiling_exits_4() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        "big.json",
        r#"{"experiment": "chain_1d", "lattice": {"n_qubits": 9}, "fields": {"E_start_kV_cm": 6.7, "E_end_kV_cm": 7.3}}"#,
    );
    let o = molqa(&["anneal", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_record(&o)["kind"], "size_limit");
}

#[test]
fn tracking_failure_exits_3() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        "coarse.json",
        r#"{"experiment": "spectrum", "fields": {"E_max_kV_cm": 2.0, "E_points": 3}, "numerics": {"n_states": 72}}"#,
    );
    let o = molqa(&["spectrum", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_record(&o)["kind"], "tracking");
}

#[test]
fn scan_marks_every_point() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        "scan.json",
        r#"{"experiment": "scan", "scan": {"constant": "rotational_constant", "values": [0.2, 0.251, 0.3]}}"#,
    );
    let out = tmp.path().join("o");
    run_ok(&["scan", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let csv = read(&out, "scan_rotational_constant.csv");
    assert_eq!(
        csv.lines().next(),
        Some("B_e_cm-1,E_cross_kV_cm,E_perp_kV_cm,E_z_kV_cm,J_perp_at_E_perp_Hz,J_z_at_E_z_Hz,status")
    );
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].ends_with(",ok"));
    let e_perp: f64 = rows[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!((e_perp / 6.695 - 1.0).abs() < 0.01, "{e_perp}");
}

#[test]
fn threads_flag_is_validated() {
    let o = molqa(&["spectrum", "--threads", "0"], None);
    assert_eq!(o.status.code(), Some(2));
}
