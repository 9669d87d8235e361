use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ggchain")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut a = vec!["--format", "json"];
    a.extend_from_slice(args);
    serde_json::from_str(&stdout(&a)).unwrap()
}

/// CSV body with `#` metadata lines removed.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn decay_values() {
    let rows = csv_rows(&stdout(&["decay", "--tau", "0.4"]));
    assert_eq!(rows[0], ["tau", "lambda", "alpha", "xi"]);
    assert_eq!(rows[1][1], "0.693147181");
    assert_eq!(rows[1][2], "0.5");
    let v = json(&["decay", "--mass", "1", "--beta", "1"]);
    let p = &v["payload"];
    assert_eq!(p["tau"].as_f64().unwrap(), 0.25);
    assert!((p["lambda"].as_f64().unwrap() - p["xi"].as_f64().unwrap()).abs() < 1e-14);
    assert!((p["lambda"].as_f64().unwrap() - 1.3169579).abs() < 1e-7);
}

#[test]
fn decay_domain_errors() {
    assert_eq!(code(&["decay", "--tau", "0.6"]), 2);
    assert_eq!(code(&["decay", "--tau", "0"]), 2);
    assert_eq!(code(&["decay", "--mass", "0", "--beta", "1"]), 2);
    assert_eq!(code(&["decay", "--mass", "1"]), 2);
    assert_eq!(code(&["decay", "--tau", "0.3", "--mass", "1", "--beta", "1"]), 2);
}

#[test]
fn corr_both_methods_agree() {
    let text = stdout(&["corr", "--graph", "open", "--n", "3", "--tau", "0.4", "--method", "both"]);
    let dev: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# max_abs_deviation: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(dev <= 1e-10);
    let rows = csv_rows(&text);
    assert_eq!(rows[0], ["index", "1", "2", "3"]);
    assert_eq!(rows[1][3], "0.19047619");
}

#[test]
fn corr_layouts() {
    let rows = csv_rows(&stdout(&["corr", "--graph", "cycle", "--n", "3", "--tau", "0.4"]));
    assert_eq!(rows[1][2], "0.666666667");
    let rows = csv_rows(&stdout(&["corr", "--graph", "open", "--n", "1", "--tau", "0.3"]));
    assert_eq!(rows, [vec!["index", "1"], vec!["1", "1"]]);
    let rows = csv_rows(&stdout(&["corr", "--graph", "centered", "--n", "2", "--tau", "0.3"]));
    assert_eq!(rows[0], ["index", "-2", "-1", "0", "1", "2"]);
    assert_eq!(rows[1][0], "-2");
    assert_eq!(code(&["corr", "--graph", "cycle", "--n", "2", "--tau", "0.3"]), 2);
    assert_eq!(code(&["corr", "--graph", "open", "--n", "3", "--tau", "0.5"]), 2);
}

#[test]
fn converge_fit() {
    let v = json(&[
        "converge", "--graph", "centered", "--i", "0", "--j", "1", "--tau", "0.45", "--n-min", "5", "--n-max", "40",
        "--fit",
    ]);
    let fit = &v["payload"]["fit"];
    assert!(fit["relative_slope_error"].as_f64().unwrap() <= 0.02);
    assert!(fit["r_squared"].as_f64().unwrap() >= 0.999);
    assert_eq!(v["payload"]["sweep"]["records"].as_array().unwrap().len(), 36);
}

#[test]
fn converge_diagonal_and_errors() {
    let args = ["converge", "--graph", "open", "--i", "2", "--j", "2", "--tau", "0.3", "--n-min", "3", "--n-max", "9"];
    let rows = csv_rows(&stdout(&args));
    assert_eq!(rows[0], ["n", "exact", "limit", "abs_err", "rel_err", "scaled_rel"]);
    assert!(rows[1..].iter().all(|r| r[3] == "0" && r[4] == "0" && r[5] == "0"));
    let mut fit = args.to_vec();
    fit.push("--fit");
    assert_eq!(code(&fit), 4);
    let out = run(&["converge", "--graph", "cycle", "--i", "0", "--j", "1", "--tau", "0.3", "--n-min", "3", "--n-max", "9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no asymptotic expansion available for cycle"));
    assert_eq!(code(&["converge", "--graph", "centered", "--i", "-3", "--j", "0", "--n-min", "2", "--n-max", "9"]), 2);
}

#[test]
fn circulant_tables() {
    let rows = csv_rows(&stdout(&["circulant", "--n", "3", "--tau", "0.4"]));
    assert_eq!(rows[0], ["k", "omega_k", "alpha^k", "omega_k-alpha^k"]);
    assert_eq!(rows[2][1], "0.666666667");
    let v = json(&["circulant", "--n", "64", "--tau", "0.4", "--k", "1", "--riemann"]);
    let r = &v["payload"][0];
    assert!((r["i_k"].as_f64().unwrap() - 5.2359878).abs() < 1e-7);
    assert!(r["gap"].as_f64().unwrap().abs() < 1e-12);
    let v = json(&["circulant", "--n", "16", "--tau", "0", "--k", "0", "--riemann"]);
    let r = &v["payload"][0];
    assert_eq!(r["s_k"].as_f64(), Some(2.0 * std::f64::consts::PI));
    assert_eq!(r["i_k"].as_f64(), Some(2.0 * std::f64::consts::PI));
    assert_eq!(code(&["circulant", "--n", "2", "--tau", "0.4"]), 2);
    assert_eq!(code(&["circulant", "--n", "5", "--tau", "0.4", "--k", "5"]), 2);
}

#[test]
fn sample_is_reproducible() {
    let args = ["sample", "--graph", "open", "--n", "5", "--tau", "0.4", "--count", "200000", "--seed", "42"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("# seed: 42"));
    assert_eq!(code(&["sample", "--graph", "open", "--n", "5", "--tau", "0.4", "--count", "10", "--seed", "1"]), 2);
}

#[test]
fn thread_cap_does_not_change_output() {
    let args = ["--deterministic", "sample", "--graph", "cycle", "--n", "6", "--tau", "0.3", "--count", "5000", "--seed", "9"];
    let base = run(&args);
    let capped = Command::new(env!("CARGO_BIN_EXE_ggchain")).args(args).env("GGCHAIN_THREADS", "1").output().unwrap();
    assert_eq!(base.stdout, capped.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_ggchain")).args(args).env("GGCHAIN_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[derive(serde::Deserialize, serde::Serialize, PartialEq, Debug)]
struct Envelope {
    metadata: Metadata,
    payload: Value,
}

#[derive(serde::Deserialize, serde::Serialize, PartialEq, Debug)]
#[serde(deny_unknown_fields)]
struct Metadata {
    command: String,
    parameters: Value,
    version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rng: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    normal_method: Option<String>,
}

#[test]
fn json_envelope_round_trips() {
    let cases: [&[&str]; 5] = [
        &["decay", "--tau", "0.25"],
        &["corr", "--graph", "centered", "--n", "3", "--tau", "0.35", "--method", "both"],
        &["converge", "--graph", "open", "--i", "1", "--j", "3", "--tau", "0.4", "--n-min", "4", "--n-max", "12"],
        &["circulant", "--n", "10", "--tau", "0.2", "--riemann"],
        &["sample", "--graph", "centered", "--n", "2", "--tau", "0.2", "--count", "1000", "--seed", "5"],
    ];
    for args in cases {
        let mut a = vec!["--format", "json"];
        a.extend_from_slice(args);
        let text = stdout(&a);
        let env: Envelope = serde_json::from_str(&text).unwrap();
        assert_eq!(env.metadata.command, args[0]);
        assert_eq!(env.metadata.version, env!("CARGO_PKG_VERSION"));
        assert_eq!(env.metadata.seed.is_some(), args[0] == "sample");
        let again: Envelope = serde_json::from_str(&serde_json::to_string(&env).unwrap()).unwrap();
        assert_eq!(env, again);
        assert_eq!(text, stdout(&a), "rerun differs for {args:?}");
    }
}

#[test]
fn json_keeps_full_precision() {
    let v = json(&["corr", "--graph", "cycle", "--n", "3", "--tau", "0.4"]);
    let x = v["payload"]["matrix"][0][1].as_f64().unwrap();
    assert!((x - 2.0 / 3.0).abs() <= 2.0 * f64::EPSILON);
    assert!(x.to_string().len() > 12);
}
