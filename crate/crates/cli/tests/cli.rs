use std::process::{Command, Output};

fn ztselect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ztselect"))
        .args(args)
        .env_remove("ZTSELECT_THREADS")
        .output()
        .expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn column(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"))
}

const HEADER: &str = "alpha,gamma_slope,beta,depth,P,log_P_over_beta,P_e2beta,x_ratio,nu_cyl_ratio,nu_star_ratio,mu0,mu1,mu2,mu_ratio,target_mu_ratio,target_gamma,residual_H,residual_nu,certified";

#[test]
fn eig_at_zero_beta_gives_ln3() {
    let o = ztselect(&["eig", "--alpha", "1", "--beta", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    let p: f64 = rows[1][column(&rows[0], "P")].parse().unwrap();
    assert!((p - 1.0986123).abs() < 1e-7);
}

#[test]
fn eig_json_carries_scaled_pressure_and_rings() {
    let o = ztselect(&["eig", "--alpha", "2", "--beta", "40", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let row = &v["rows"][0];
    assert!(row["P_e2beta"].as_f64().unwrap() > 0.5);
    assert!(v["config"].is_object());
    assert!(v["checks"].is_array());
    assert!(v["rings"].as_array().unwrap().len() >= 13);
}

#[test]
fn argument_errors_exit_one() {
    for args in [
        &["eig", "--gamma-slope", "1.0"][..],
        &["eig", "--alpha", "-1"],
        &["eig", "--beta", "-2"],
        &["eig", "--tol", "0.1"],
        &["eig", "--depth", "2"],
        &["sweep", "--beta-grid", "5,2"],
        &["sweep", "--alpha-grid", "1,1"],
        &["eig", "--no-such-flag"],
        &["frobnicate"],
    ] {
        let o = ztselect(args);
        assert_eq!(
            o.status.code(),
            Some(1),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn bad_thread_cap_is_an_argument_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_ztselect"))
        .args(["sweep"])
        .env("ZTSELECT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn underflowing_pressure_is_a_numerical_failure() {
    let o = ztselect(&["eig", "--alpha", "2", "--beta", "700"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_header_and_row_count() {
    let o = ztselect(&[
        "sweep",
        "--alpha-grid",
        "0.5,1,2",
        "--beta-grid",
        "10,20,40",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 10);
    assert_eq!(lines[0], HEADER);
}

#[test]
fn sweep_rows_match_eig_bit_for_bit() {
    let sweep = csv_rows(&ztselect(&[
        "sweep",
        "--alpha-grid",
        "0.5,2",
        "--beta-grid",
        "7,30",
    ]));
    let eig = csv_rows(&ztselect(&["eig", "--alpha", "2", "--beta", "30"]));
    assert_eq!(sweep[4], eig[1]);
}

#[test]
fn golden_target_on_alpha_one_rows() {
    let rows = csv_rows(&ztselect(&[
        "sweep",
        "--alpha-grid",
        "1",
        "--beta-grid",
        "10,20",
    ]));
    let c = column(&rows[0], "target_mu_ratio");
    for r in &rows[1..] {
        let t: f64 = r[c].parse().unwrap();
        assert!((t - 2.6180339887).abs() < 1e-10);
    }
}

#[test]
fn sweep_is_deterministic_across_thread_caps() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_ztselect"))
            .args(["sweep"])
            .env("ZTSELECT_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    let one = run("1");
    assert!(!one.is_empty());
    assert_eq!(one, run("4"));
    assert_eq!(one, ztselect(&["sweep"]).stdout);
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    let o = ztselect(&["sweep", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), ztselect(&["sweep"]).stdout);
}

#[test]
fn verify_passes_and_names_its_checks() {
    let o = ztselect(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rows = csv_rows(&o);
    let names: Vec<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    for n in [
        "peierls_negative",
        "cross_oracle_pressure",
        "residual_contract",
        "sandwich",
        "tail_bound",
    ] {
        assert!(names.contains(&n), "missing {n}");
    }
}

#[test]
fn verify_fails_under_injected_perturbation() {
    let o = ztselect(&["verify", "--inject-perturbation", "1e-6"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn verify_json_has_checks() {
    let o = ztselect(&["verify", "--format", "json", "--gamma-slope", "2.5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["pass"] == true));
}

fn subaction_rows(args: &[&str]) -> Vec<serde_json::Value> {
    let mut all = vec!["subaction", "--format", "json"];
    all.extend_from_slice(args);
    let o = ztselect(&all);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    v["rows"].as_array().unwrap().clone()
}

#[test]
fn subaction_values_per_regime() {
    let rows = subaction_rows(&["--alpha-grid", "0.5,2"]);
    let at = |alpha: f64| rows.iter().find(|r| r["alpha"] == alpha).unwrap();
    assert_eq!(at(0.5)["delta_v"], 0.5);
    assert_eq!(at(0.5)["gamma"], -1.5);
    assert_eq!(at(2.0)["delta_v"], 1.0);
    assert_eq!(at(2.0)["gamma"], -2.0);
    assert!(rows.iter().all(|r| r["certified"] == true));
    assert!(rows
        .iter()
        .all(|r| r["calibration_error"].as_f64().unwrap() <= 1e-12));
}

#[test]
fn subaction_other_slopes_are_uncertified() {
    let rows = subaction_rows(&["--gamma-slope", "2.5", "--alpha-grid", "2"]);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r["certified"] == false));
}
