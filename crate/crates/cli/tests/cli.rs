//! End-to-end runs of the `uavcov` binary.

use std::io::Write;
use std::process::{Command, Output};

use uavcov_cli::{read_csv, Row};

fn uavcov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uavcov"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn rows(args: &[&str]) -> Vec<Row> {
    let out = uavcov(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    read_csv(out.stdout.as_slice()).unwrap()
}

fn value(rows: &[Row], metric: &str) -> f64 {
    rows.iter()
        .rev()
        .find(|r| r.metric == metric && r.tier == "total")
        .and_then(|r| r.analytical)
        .unwrap_or_else(|| panic!("no {metric} row"))
}

fn scenario(toml: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".toml").tempfile().unwrap();
    f.write_all(toml.as_bytes()).unwrap();
    f
}

#[test]
fn association_rows_form_a_distribution() {
    let r = rows(&["eval", "--metric", "association"]);
    assert_eq!(r.len(), 6);
    let sum: f64 = r.iter().map(|x| x.analytical.unwrap()).sum();
    assert!((sum - 1.0).abs() < 1e-3, "sum {sum}");
    assert!(r.iter().all(|x| x.status == "ok" && x.mc_estimate.is_none()));
}

#[test]
fn exit_codes_classify_failures() {
    let missing = uavcov(&["eval", "--config", "/definitely/not/here.toml"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("not/here.toml"));

    assert_eq!(uavcov(&["eval", "--metric", "bogus"]).status.code(), Some(2));
    assert_eq!(uavcov(&["eval", "--rho", "1.5"]).status.code(), Some(2));
    let bad = scenario("sigma = -3.0\n");
    assert_eq!(uavcov(&["eval", "--config", bad.path().to_str().unwrap()]).status.code(), Some(2));

    let infeasible = uavcov(&["optimize", "--target", "tau", "--r-min", "1e12"]);
    assert_eq!(infeasible.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&infeasible.stderr).contains("R_DL"));
}

#[test]
fn optimal_rho_in_the_noise_limited_setting() {
    let f = scenario("sigma_c2_dbm = 10.0\n");
    let r = rows(&[
        "optimize",
        "--target",
        "rho",
        "--config",
        f.path().to_str().unwrap(),
        "--gammaSINR",
        "-15dB",
    ]);
    let rho = value(&r, "rho_opt");
    assert!((rho - 0.7603).abs() < 1e-3, "rho* {rho}");
    let peak = r
        .iter()
        .filter(|x| x.tier == "scan")
        .max_by(|a, b| a.analytical.unwrap().total_cmp(&b.analytical.unwrap()))
        .unwrap();
    assert!((peak.value.unwrap() - rho).abs() <= 0.02);
}

#[test]
fn tau_without_a_rate_floor_maximizes_the_uplink_rate() {
    let r = rows(&["optimize", "--target", "tau"]);
    let scan: Vec<&Row> = r.iter().filter(|x| x.tier == "scan").collect();
    assert!(scan.len() > 10);
    let best = scan.iter().map(|x| x.analytical.unwrap()).fold(f64::MIN, f64::max);
    let r_ul = value(&r, "r_ul_bps");
    assert!(r_ul >= best * (1.0 - 1e-9), "{r_ul} < scan max {best}");
    let tau = value(&r, "tau_opt_s");
    assert!(tau > 0.0 && tau < 1.0);
    assert_eq!(value(&r, "feasible"), 1.0);
    assert_eq!(value(&r, "tau_min_s"), 0.0);
}

#[test]
fn csv_and_json_carry_the_same_table() {
    let args = ["eval", "--metric", "association", "--metric", "sinr", "--metric", "uplink"];
    let csv = rows(&args);
    let out = uavcov(&[&args[..], &["--format", "json"]].concat());
    assert!(out.status.success());
    let json: Vec<Row> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(csv, json);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let out = uavcov(&[&args[..], &["--out", path.to_str().unwrap()]].concat());
    assert!(out.status.success() && out.stdout.is_empty());
    assert_eq!(read_csv(std::fs::File::open(&path).unwrap()).unwrap(), csv);
}

#[test]
fn simulation_is_reproducible_from_the_seed() {
    let run = |seed: &str| rows(&["simulate", "--metric", "association", "--trials", "4000", "--seed", seed]);
    let (a, b, c) = (run("7"), run("7"), run("8"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    for r in &a {
        assert!(r.mc_estimate.is_some() && r.abs_diff.is_some());
    }
    let sum: f64 = a.iter().map(|x| x.mc_estimate.unwrap()).sum();
    assert!((sum - 1.0).abs() < 1e-12);
}

#[test]
fn sweeps_keep_grid_order_and_isolate_failing_points() {
    let r = rows(&["sweep", "--param", "sigma", "--values", "-1,5,10", "--metric", "association"]);
    let values: Vec<f64> = r.iter().map(|x| x.value.unwrap()).collect();
    assert_eq!(values[0], -1.0);
    assert!(values.windows(2).all(|w| w[0] <= w[1]));
    assert!(r[0].status.starts_with("error"));
    let ok: Vec<&Row> = r.iter().filter(|x| x.status == "ok").collect();
    assert_eq!(ok.len(), 12);
    // A wider cluster pushes users away from their cluster head.
    let cluster = |s: f64| -> f64 {
        ok.iter()
            .filter(|x| x.value == Some(s) && x.tier == "cluster")
            .map(|x| x.analytical.unwrap())
            .sum()
    };
    assert!(cluster(10.0) < cluster(5.0));

    let r = rows(&["sweep", "--param", "gammaSINR", "--range", "-10:10:10", "--metric", "sinr"]);
    let totals: Vec<f64> = r.iter().filter(|x| x.tier == "total").map(|x| x.analytical.unwrap()).collect();
    assert_eq!(totals.len(), 3);
    assert!(totals.windows(2).all(|w| w[1] <= w[0]));

    assert_eq!(uavcov(&["sweep", "--param", "nonsense", "--values", "1"]).status.code(), Some(2));
    assert_eq!(uavcov(&["sweep", "--param", "h", "--values", "3,2"]).status.code(), Some(2));
}
