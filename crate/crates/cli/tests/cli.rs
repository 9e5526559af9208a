use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;
use qhd_core::fock::{model_state, ModeDim, TwoModeDensityMatrix};
use serde_json::Value;

fn qhd(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qhd"))
        .args(args)
        .current_dir(dir)
        .env("QHD_THREADS", "1")
        .output()
        .expect("qhd runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read_json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn simulate(dir: &Path, name: &str, n: &str, format: &str) -> PathBuf {
    let out = qhd(&["simulate", "--eta", "0.61", "--n", n, "--seed", "42", "--out", name, "--format", format], dir);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    dir.join(name)
}

#[test]
fn simulate_writes_records_metadata_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulate(dir.path(), "d.qhd", "5000", "bin");
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 12 + 5000 * 32);
    let meta = read_json(dir.path().join("d.qhd.meta.json"));
    assert_eq!(meta["seed"], 42);
    assert_eq!(meta["n_records"], 5000);
    let manifest = read_json(dir.path().join("d.qhd.manifest.json"));
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["config"]["n"], 5000);
    assert!(manifest["argv"].as_array().unwrap().len() > 5);
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = std::fs::read(simulate(dir.path(), "a.csv", "3000", "csv")).unwrap();
    let b = std::fs::read(simulate(dir.path(), "b.csv", "3000", "csv")).unwrap();
    assert_eq!(a, b);
    let bin = std::fs::read(simulate(dir.path(), "c.qhd", "3000", "bin")).unwrap();
    let again = std::fs::read(simulate(dir.path(), "d.qhd", "3000", "bin")).unwrap();
    assert_eq!(bin, again);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&qhd(&["simulate", "--eta", "1.2", "--n", "10", "--out", "x.csv"], d)), 2);
    assert_eq!(code(&qhd(&["simulate", "--eta", "0.5", "--n", "0", "--out", "x.csv"], d)), 2);
    assert_eq!(code(&qhd(&["simulate", "--n", "10", "--out", "x.csv"], d)), 2);
    assert_eq!(code(&qhd(&["reconstruct", "--in", "x", "--method", "xx", "--out", "r.json"], d)), 2);
    assert_eq!(code(&qhd(&["frobnicate"], d)), 2);
}

#[test]
fn input_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&qhd(&["reconstruct", "--in", "missing.qhd", "--method", "pf", "--out", "r.json"], d)), 3);
    std::fs::write(d.join("bad.json"), "{not json").unwrap();
    assert_eq!(code(&qhd(&["analyze", "negativity", "--rho", "bad.json"], d)), 3);
    std::fs::write(d.join("v2.qhd"), b"QHD2\0\0\0\0\0\0\0\0").unwrap();
    let out = qhd(&["reconstruct", "--in", "v2.qhd", "--method", "pf", "--out", "r.json"], d);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("QHD2"));
    std::fs::write(d.join("bad.csv"), "x1,theta1,x2,theta2\n0,0,0\n").unwrap();
    assert_eq!(code(&qhd(&["reconstruct", "--in", "bad.csv", "--method", "pf", "--out", "r.json"], d)), 3);
}

#[test]
fn quasi_distribution_state_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let dim = ModeDim::new(2).unwrap();
    let mut rho = TwoModeDensityMatrix::zeros(dim);
    rho.set(0, 0, 0, 0, Complex64::new(1.1, 0.0));
    rho.set(1, 1, 1, 1, Complex64::new(-0.1, 0.0));
    rho.write_json(dir.path().join("neg.json"), Default::default()).unwrap();
    let out = qhd(&["simulate", "--state", "neg.json", "--n", "10", "--out", "x.csv"], dir.path());
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("quasi-distribution"));
}

#[test]
fn simulate_from_state_file() {
    let dir = tempfile::tempdir().unwrap();
    model_state(0.61, ModeDim::default())
        .unwrap()
        .write_json(dir.path().join("model.json"), Default::default())
        .unwrap();
    let out = qhd(&["simulate", "--state", "model.json", "--n", "2000", "--out", "s.csv"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = read_json(dir.path().join("s.csv.manifest.json"));
    assert_eq!(manifest["inputs"][0], "model.json");
}

#[test]
fn pattern_function_reconstruction_and_cleaning() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, "d.qhd", "200000", "bin");
    let out = qhd(&["reconstruct", "--in", "d.qhd", "--method", "pf", "--out", "rho.json"], d);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (rho, meta) = TwoModeDensityMatrix::read_json(d.join("rho.json")).unwrap();
    assert_eq!(meta["method"], "pf");
    assert!((rho.get(0, 0, 0, 0).re - 0.39).abs() < 0.02);
    let report = read_json(d.join("rho.report.json"));
    assert_eq!(report["method"], "pf");
    assert!((report["trace"][0].as_f64().unwrap() - 1.0).abs() < 0.02);
    assert!(d.join("rho.manifest.json").exists());

    let out = qhd(
        &["reconstruct", "--in", "d.qhd", "--method", "pf", "--correct", "ibt:auto", "--out", "clean.json"],
        d,
    );
    assert_eq!(code(&out), 0);
    let (clean, _) = TwoModeDensityMatrix::read_json(d.join("clean.json")).unwrap();
    assert!(clean.get(0, 0, 0, 0).re.abs() < 0.03);
    assert!((clean.get(0, 1, 1, 0).re - 0.5).abs() < 0.05);
    let report = read_json(d.join("clean.report.json"));
    assert_eq!(report["correction"]["eta_source"], "auto");
    assert!((report["correction"]["eta"].as_f64().unwrap() - 0.61).abs() < 0.02);

    let out = qhd(
        &["reconstruct", "--in", "d.qhd", "--method", "pf", "--blocks", "global-phase", "--out", "blk.json"],
        d,
    );
    assert_eq!(code(&out), 0);
    let (blk, _) = TwoModeDensityMatrix::read_json(d.join("blk.json")).unwrap();
    assert_eq!(blk.off_block_magnitude(), 0.0);
}

#[test]
fn maximum_likelihood_with_efficiency_correction() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, "d.qhd", "100000", "bin");
    let args = [
        "reconstruct", "--in", "d.qhd", "--method", "ml", "--eta", "0.61", "--blocks", "global-phase", "--bin-width",
        "0.05", "--max-iters", "400", "--tol", "1e-5", "--out", "ml.json",
    ];
    let out = qhd(&args, d);
    assert!([0, 4].contains(&code(&out)), "{}", String::from_utf8_lossy(&out.stderr));
    let (rho, _) = TwoModeDensityMatrix::read_json(d.join("ml.json")).unwrap();
    assert!(rho.get(0, 0, 0, 0).re < 0.05);
    assert!((rho.get(0, 1, 1, 0).re - 0.5).abs() < 0.05);
    let report = read_json(d.join("ml.report.json"));
    assert_eq!(report["povm_eta"], 0.61);
    assert_eq!(report["binning"]["x_width"], 0.05);
    let trace = report["likelihood_trace"].as_array().unwrap();
    assert!(trace.len() >= 2);
}

#[test]
fn non_convergence_exits_4_with_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, "d.csv", "2000", "csv");
    let out = qhd(&["reconstruct", "--in", "d.csv", "--method", "ml", "--max-iters", "2", "--out", "ml.json"], d);
    assert_eq!(code(&out), 4);
    assert!(d.join("ml.json").exists());
    let report = read_json(d.join("ml.report.json"));
    assert_eq!(report["status"], "max-iterations");
    assert_eq!(report["iterations"], 2);
}

#[test]
fn negativity_of_model_state() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    model_state(0.61, ModeDim::default()).unwrap().write_json(d.join("m.json"), Default::default()).unwrap();
    let out = qhd(&["analyze", "negativity", "--rho", "m.json", "--out", "en.json"], d);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["log_negativity"].as_f64().unwrap() - 0.41577).abs() < 1e-4);
    assert_eq!(read_json(d.join("en.json")), v);
}

#[test]
fn negativity_with_bootstrap_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, "d.qhd", "20000", "bin");
    assert_eq!(code(&qhd(&["reconstruct", "--in", "d.qhd", "--method", "pf", "--out", "rho.json"], d)), 0);
    let out = qhd(
        &["analyze", "negativity", "--rho", "rho.json", "--records", "d.qhd", "--bootstrap", "4"],
        d,
    );
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let err = v["bootstrap_error"].as_f64().unwrap();
    assert!(err > 0.0 && err < 0.1, "{err}");
}

#[test]
fn bell_theory_scan_and_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = qhd(&["analyze", "bell-theory", "--eta", "1", "--j-max", "0.5", "--steps", "100", "--out", "b.csv"], d);
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(d.join("b.csv")).unwrap();
    assert_eq!(csv.lines().count(), 102);
    assert_eq!(csv.lines().next(), Some("J,B"));
    let summary = read_json(d.join("b.csv.summary.json"));
    assert!((summary["min_b"].as_f64().unwrap() + 2.17).abs() < 0.01);
    assert!((summary["refined_argmin_j"].as_f64().unwrap() - 0.1).abs() < 0.005);
    assert_eq!(summary["violates"], true);
    assert!(d.join("b.csv.manifest.json").exists());

    let out = qhd(&["analyze", "threshold"], d);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["eta_star"].as_f64().unwrap() - 0.96).abs() < 0.01);
}

#[test]
fn bell_scan_of_matrix_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    model_state(0.61, ModeDim::default()).unwrap().write_json(d.join("m.json"), Default::default()).unwrap();
    let out = qhd(&["analyze", "bell", "--rho", "m.json", "--steps", "50", "--out", "s.csv"], d);
    assert_eq!(code(&out), 0);
    let summary = read_json(d.join("s.csv.summary.json"));
    assert_eq!(summary["violates"], false);
    assert_eq!(summary["eta_label"], "reconstructed");
}

#[test]
fn reproduce_pipeline_small() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = qhd(
        &["reproduce", "--out-dir", "run", "--n", "20000", "--bootstrap", "2", "--max-iters", "30"],
        d,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS") || stdout.contains("FAIL"));
    for f in ["records.qhd", "rho_pf.json", "rho_pf_ibt.json", "rho_ml_eta.json", "bell_curves.csv", "summary.json"] {
        assert!(d.join("run").join(f).exists(), "{f}");
    }
    let summary = read_json(d.join("run/summary.json"));
    assert_eq!(summary["n_records"], 20000);
}
