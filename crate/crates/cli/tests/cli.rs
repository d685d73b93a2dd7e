use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subquantum"))
        .args(args)
        .env_remove("SUBQUANTUM_SEED")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn value(v: &Value, path: &[&str]) -> f64 {
    path.iter()
        .fold(v, |v, k| &v[*k])
        .as_f64()
        .unwrap_or_else(|| panic!("{path:?} in {v}"))
}

#[test]
fn nonlocality_asymmetric_couplings() {
    let v = json(&[
        "nonlocality",
        "--thetaB-prime",
        "90",
        "--aA",
        "2",
        "--aB",
        "1",
        "--method",
        "grid",
        "--m",
        "400",
    ]);
    assert!((value(&v, &["result", "alpha", "value"]) - 0.125).abs() < 5e-3);
    assert!((value(&v, &["result", "beta_tilde", "value"]) - 0.375).abs() < 5e-3);
    assert_eq!(v["config"]["coupling"]["a_a"], 2.0);
    assert_eq!(v["version"], subquantum::VERSION);
    assert_eq!(v["command"], "nonlocality");
}

#[test]
fn sweep_saturates_bound_five() {
    let out = run(&[
        "sweep",
        "--delta-grid",
        "0:180:15",
        "--check-bound",
        "5",
        "--method",
        "grid",
        "--m",
        "400",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("delta_rad,alpha,alpha_err,beta_tilde,beta_tilde_err,bound_rhs,gap")
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 13);
    for r in &rows {
        assert_eq!(r.len(), 7);
        assert!(r[6].abs() < 5e-3, "{r:?}");
    }
    assert!((rows[12][0] - std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn outputs_are_byte_identical_for_identical_config() {
    let args = [
        "correlation",
        "--thetaB",
        "60",
        "--n",
        "20000",
        "--seed",
        "7",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&[
        "correlation",
        "--thetaB",
        "60",
        "--n",
        "20000",
        "--seed",
        "8",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn seed_environment_variable_sets_default_seed() {
    let with_env = Command::new(env!("CARGO_BIN_EXE_subquantum"))
        .args(["correlation", "--n", "5000"])
        .env("SUBQUANTUM_SEED", "9")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&with_env.stdout).unwrap();
    assert_eq!(v["config"]["method"]["seed"], 9);
    // an explicit flag still wins
    let flagged = Command::new(env!("CARGO_BIN_EXE_subquantum"))
        .args(["correlation", "--n", "5000", "--seed", "3"])
        .env("SUBQUANTUM_SEED", "9")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&flagged.stdout).unwrap();
    assert_eq!(v["config"]["method"]["seed"], 3);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(
        &path,
        "# test\ncoupling.a_b = 0.5\nmethod.kind = grid\nmethod.m = 50\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let v = json(&["correlation", "--config", p]);
    assert_eq!(v["config"]["coupling"]["a_b"], 0.5);
    let v = json(&["correlation", "--config", p, "--aB", "1"]);
    assert_eq!(v["config"]["coupling"]["a_b"], 1.0);
    let v = json(&["correlation", "--config", p, "--set", "coupling.a_b=2"]);
    assert_eq!(v["config"]["coupling"]["a_b"], 2.0);
}

#[test]
fn validation_errors_exit_one_and_name_the_key() {
    let out = run(&["correlation", "--width", "-1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("packet.width"));

    let out = run(&["nonlocality", "--method", "grid", "--m", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("theta_b_prime"));

    let out = run(&["bits", "--set", "nonsense.key=1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonsense.key"));
}

#[test]
fn unknown_subcommand_is_rejected() {
    let out = run(&["teleport"]);
    assert!(!out.status.success());
}

#[test]
fn trajectory_csv_starts_at_lambda() {
    let out = run(&[
        "trajectory",
        "--thetaB",
        "90",
        "--rA",
        "0.1",
        "--rB",
        "-0.2",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,r_A,r_B,region_id"));
    assert_eq!(lines.next(), Some("0,0.1,-0.2,15"));
    assert!(lines.count() >= 1);
}

#[test]
fn outcome_map_fractions() {
    let v = json(&["outcomes", "--thetaB", "90", "--resolution", "40"]);
    for k in ["plus_plus", "plus_minus", "minus_plus", "minus_minus"] {
        assert!(
            (value(&v, &["result", "fractions", k]) - 0.25).abs() < 0.03,
            "{k}"
        );
    }
    let rows = v["result"]["map_rows_from_lowest_r_B"].as_array().unwrap();
    assert_eq!(rows.len(), 40);
}

#[test]
fn bits_and_circle() {
    let v = json(&["bits"]);
    assert!((value(&v, &["result", "bits_per_pair"]) - 0.25).abs() < 1e-12);
    let v = json(&["bits", "--lo", "-90", "--hi", "90"]);
    assert!(
        (value(&v, &["result", "bits_per_pair"]) - 0.25 * (1.0 - 2.0 / std::f64::consts::PI)).abs()
            < 1e-12
    );

    let v = json(&[
        "circle",
        "--thetaB-prime",
        "30",
        "--method",
        "grid",
        "--m",
        "400",
    ]);
    let nu = 30f64.to_radians() / (2.0 * std::f64::consts::PI);
    assert!((value(&v, &["result", "report", "nu_plus_minus", "value"]) - nu).abs() < 5e-3);
    assert_eq!(v["result"]["gamma_equals"], "setting shift");
    let out = run(&["circle"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn nonequilibrium_signal_is_visible() {
    let v = json(&[
        "signal",
        "--thetaB-prime",
        "90",
        "--ensemble",
        "half-square",
        "--set",
        "ensemble.side=right",
        "--method",
        "grid",
        "--m",
        "200",
    ]);
    assert!((value(&v, &["result", "signal", "value"]) - 0.25).abs() < 0.02);
}

#[test]
fn entanglement_fit_is_reported() {
    let v = json(&["entanglement", "--method", "grid", "--m", "200"]);
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 5);
    assert!((value(&v, &["result", "fit_at_pi", "c0"]) - 0.5).abs() < 5e-3);
}

#[test]
fn search_balanced_single_shift() {
    let v = json(&[
        "search-balanced",
        "--thetaB-prime",
        "90",
        "--cells",
        "4",
        "--budget",
        "64",
        "--method",
        "grid",
        "--m",
        "64",
    ]);
    assert_eq!(v["result"]["exact_balance"], true);
    assert!(value(&v, &["result", "max_residual"]) < 1e-9);
    let v = json(&["search-balanced", "--method", "grid", "--m", "10"]);
    assert_eq!(v["result"]["residuals"].as_array().unwrap().len(), 0);
}

#[test]
fn verify_subset_passes_and_csv_has_one_header() {
    let out = run(&["verify", "--ids", "13,14", "--format", "csv"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("id,")).count(), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("criterion 13 PASS"));
}

#[test]
fn verify_failure_exits_two() {
    let out = run(&["verify", "--ids", "12"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let expect = if v["result"]["passed"] == true { 0 } else { 2 };
    assert_eq!(out.status.code(), Some(expect));
}

#[test]
fn output_path_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bits.csv");
    let out = run(&[
        "bits",
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success() && out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("lo_rad,hi_rad,bits_per_pair\n"));
}
