use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn osc(args: &[&str], out: &Path, envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_osc"));
    cmd.args(args).arg("--out").arg(out).env_remove("OSC_SEED_GUARD");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("osc runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.params");
    std::fs::write(&p, text).unwrap();
    p
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

#[test]
fn solve_slow_stop_passes_and_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = fixture("slow_stop.params");
    for dir in [&a, &b] {
        let out = osc(&["solve", "--config", cfg.to_str().unwrap()], dir.path(), &[]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let csv_a = std::fs::read(a.path().join("solution.csv")).unwrap();
    let csv_b = std::fs::read(b.path().join("solution.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    let text = String::from_utf8(csv_a).unwrap();
    assert!(text.starts_with("t,v_formula,v_direct,abs_err\n"));
    assert_eq!(text.lines().count(), 10_001);
}

#[test]
fn trivial_config_stays_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = osc(&["solve", "--config", fixture("trivial.params").to_str().unwrap()], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    for row in rows(&csv) {
        assert_eq!(row[2], 1.0);
        assert!((row[1] - 1.0).abs() < 1e-8);
    }
}

#[test]
fn tight_bound_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        write_config(dir.path(), "name = constant\na0 = 0.2\nb0 = 4\nt_end = 5\npoints = 64\nmax_rel_err = 1e-300\n");
    let out = osc(&["solve", "--config", cfg.to_str().unwrap()], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn classify_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("slow_stop.params", "WeaklyDissipative"),
        ("overdamped.params", "Creeping"),
        ("omega_linear.params", "Mixed"),
    ];
    for (file, kind) in cases {
        let out = osc(&["classify", "--json", "--config", fixture(file).to_str().unwrap()], dir.path(), &[]);
        assert_eq!(out.status.code(), Some(0));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["kind"], kind, "{file}");
    }
}

#[test]
fn kernel_at_zero_distance_is_a_delta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        write_config(dir.path(), "family = gamma\ntau = 1\ndt = 0.05\nwindow = 40\nR = 0, 1\nsemigroup_tol = 1e-2\n");
    let out = osc(&["kernel", "--config", cfg.to_str().unwrap()], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("kernels.csv")).unwrap();
    assert!(csv.starts_with("t,K_0,K_1\n"));
    let rows = rows(&csv);
    assert_eq!(rows[0][1], 20.0);
    assert!(rows[1..].iter().all(|r| r[1] == 0.0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("kernel.json")).unwrap()).unwrap();
    assert_eq!(report["semigroup"]["R1"], 1.0);
}

#[test]
fn field_is_zero_before_the_front() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "family = gamma\ntau = 1\ndt = 0.02\nwindow = 40\nc0 = 2\nradii = 1, 3\n");
    let out = osc(&["field", "--config", cfg.to_str().unwrap()], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = std::fs::read_to_string(dir.path().join("field.csv")).unwrap();
    assert!(csv.starts_with("r,t,G\n"));
    for row in rows(&csv) {
        if row[1] < row[0] / 2.0 {
            assert_eq!(row[2], 0.0);
        }
    }
}

#[test]
fn input_errors_exit_3_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = osc(&["solve", "--config", "/definitely/missing.params"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"], "InvalidInput");

    let out = osc(&["solve", "--points", "8"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn numeric_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    // K_5 does not fit in a window of 2 tau
    let cfg = write_config(dir.path(), "family = gamma\ntau = 1\ndt = 0.01\nwindow = 2\nR = 5\n");
    let out = osc(&["kernel", "--config", cfg.to_str().unwrap()], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(4));
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"], "AliasingSuspected");
}

#[test]
fn seed_guard_env_moves_the_horizon_guard() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "name = finite_stop_first_order\nT = 10\na0 = 0.01\nb0 = 0.2\nphi = 1\npsi = 1\nt_end = 9.95\npoints = 500\n",
    );
    let ok = osc(&["solve", "--config", cfg.to_str().unwrap()], dir.path(), &[]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let guarded = osc(&["solve", "--config", cfg.to_str().unwrap()], dir.path(), &[("OSC_SEED_GUARD", "0.01")]);
    assert_eq!(guarded.status.code(), Some(4));
    let v: serde_json::Value = serde_json::from_slice(&guarded.stderr).unwrap();
    assert_eq!(v["error"], "HorizonExceeded");
}

#[test]
fn validate_all_exit_code_matches_its_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = osc(&["validate-all"], dir.path(), &[]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 12);
    assert!(lines.iter().all(|l| l.starts_with("PASS ") || l.starts_with("FAIL ")));
    let any_fail = lines.iter().any(|l| l.starts_with("FAIL "));
    assert_eq!(out.status.code(), Some(if any_fail { 2 } else { 0 }));
}
