use std::path::PathBuf;
use std::process::Command;

use entropy_bounds_cli::{main_with_args, SWEEP_HEADER};

fn spectrum(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../spectra");
    root.join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("entropy-bounds").chain(args.iter().copied());
    let code = main_with_args(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn field(line: &str, i: usize) -> f64 {
    line.split(',').nth(i).unwrap().parse().unwrap()
}

#[test]
fn bound_sub_threshold() {
    let osc = spectrum("oscillator.json");
    let (code, out, _) = run(&["bound", "--spectrum", &osc, "--E", "1", "--eps", "0.25"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some(SWEEP_HEADER));
    let row = lines.next().unwrap();
    assert!((field(row, 2) - 1.1246703).abs() < 1e-7);
    assert!(row.contains(",SubThreshold,"));
    assert!((field(row, 4) - 0.5).abs() < 1e-9);
    assert!(row.ends_with(",nats"));
}

#[test]
fn bound_saturated() {
    let osc = spectrum("oscillator.json");
    let (code, out, _) = run(&["bound", "--spectrum", &osc, "--E", "1", "--eps", "0.9"]);
    assert_eq!(code, 0);
    let row = out.lines().nth(1).unwrap();
    assert!((field(row, 2) - 1.3862944).abs() < 1e-7);
    assert!(row.contains(",Saturated,"));
    // no F+ argument on the saturated branch
    assert!(row.ends_with(",,nats"));
}

#[test]
fn bits_convert_entropies_only() {
    let osc = spectrum("oscillator.json");
    let (_, out, _) = run(&[
        "bound",
        "--spectrum",
        &osc,
        "--E",
        "1",
        "--eps",
        "0.9",
        "--bits",
    ]);
    let row = out.lines().nth(1).unwrap();
    assert!((field(row, 2) - 2.0).abs() < 1e-9);
    assert!((field(row, 4) - 0.5).abs() < 1e-9);
    assert!(row.ends_with(",bits"));
}

#[test]
fn sweep_is_sorted_and_deterministic() {
    let s = spectrum("power_law.json");
    let args = [
        "sweep",
        "--spectrum",
        &s,
        "--E",
        "log:0.1:10:5",
        "--eps",
        "0.05:1:4",
    ];
    let (code, out, _) = run(&args);
    assert_eq!(code, 0);
    let rows: Vec<(f64, f64)> = out
        .lines()
        .skip(1)
        .map(|l| (field(l, 0), field(l, 1)))
        .collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(run(&args).1, out);
}

#[test]
fn sweep_json_rows() {
    let s = spectrum("two_level.json");
    let (code, out, _) = run(&[
        "sweep",
        "--spectrum",
        &s,
        "--E",
        "0.3",
        "--eps",
        "0.1,0.5",
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    let rows: serde_json::Value = serde_json::from_str(&out).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["branch"], "Saturated");
    assert_eq!(rows[0]["log_base"], "nats");
}

#[test]
fn gibbs_output() {
    let osc = spectrum("oscillator.json");
    let (code, out, _) = run(&["gibbs", "--spectrum", &osc, "--E", "1", "--tol", "1e-13"]);
    assert_eq!(code, 0);
    let row = out.lines().nth(1).unwrap();
    assert!((field(row, 1) - std::f64::consts::LN_2).abs() < 1e-10);
    assert!((field(row, 2) - 2.0).abs() < 1e-10);
    assert!((field(row, 4) - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
}

#[test]
fn witness_json_reports_achieved_quantities() {
    let osc = spectrum("oscillator.json");
    let (code, out, _) = run(&[
        "witness",
        "--spectrum",
        &osc,
        "--E",
        "1",
        "--eps",
        "0.25",
        "--tol",
        "1e-12",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let kappa = v["kappa"].as_f64().unwrap();
    assert!((v["achieved"].as_f64().unwrap() - kappa).abs() < 1e-9);
    assert!((v["tv"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert!((v["expected_energy"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["y"]["probs"].as_array().unwrap().len(), 1);
}

#[test]
fn witness_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    let s = spectrum("three_level.json");
    let p = path.to_string_lossy().into_owned();
    let (code, out, _) = run(&[
        "witness",
        "--spectrum",
        &s,
        "--E",
        "0.5",
        "--eps",
        "0.2",
        "--format",
        "csv",
        "--output",
        &p,
    ]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("distribution,index,probability\nX,0,0.8\n"));
    assert!(text.lines().any(|l| l == "Y,0,1"));
}

#[test]
fn verify_two_level_passes() {
    let s = spectrum("two_level.json");
    let (code, out, _) = run(&[
        "verify",
        "--spectrum",
        &s,
        "--E",
        "0.3",
        "--trials",
        "1000",
        "--seed",
        "7",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["violations"], 0);
    assert_eq!(v["passed"], true);
    assert_eq!(v["seed"], 7);
    let suites: Vec<&str> = v["suites"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["suite"].as_str().unwrap())
        .collect();
    assert_eq!(
        suites,
        ["classical", "fano", "quantum", "oracle", "identity"]
    );
}

#[test]
fn oracle_point() {
    let osc = spectrum("oscillator.json");
    let (code, out, _) = run(&[
        "oracle",
        "--spectrum",
        &osc,
        "--E",
        "1",
        "--eps",
        "0.9",
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["abs_diff"].as_f64().unwrap() < 1e-5);
}

#[test]
fn domain_errors_exit_one() {
    let osc = spectrum("oscillator.json");
    let cases: [&[&str]; 6] = [
        &["bound", "--spectrum", &osc, "--E", "-1", "--eps", "0.2"],
        &["bound", "--spectrum", &osc, "--E", "1", "--eps", "1.5"],
        &["bound", "--spectrum", &osc, "--E", "1:2:3", "--eps", "0.2"],
        &[
            "bound",
            "--spectrum",
            "/nonexistent.json",
            "--E",
            "1",
            "--eps",
            "0.2",
        ],
        &["sweep", "--spectrum", &osc, "--E", "2:1:3", "--eps", "0.2"],
        &["frobnicate", "--spectrum", &osc],
    ];
    for args in cases {
        let (code, out, err) = run(args);
        assert_eq!(code, 1, "{args:?}");
        assert!(out.is_empty());
        assert_eq!(err.lines().count(), 1, "{err}");
    }
}

#[test]
fn malformed_spectrum_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"levels": [0, 1], "generator": {"kind": "linear", "slope": -1, "offset": 0}}"#,
    )
    .unwrap();
    let p = path.to_string_lossy().into_owned();
    let (code, _, err) = run(&["bound", "--spectrum", &p, "--E", "1", "--eps", "0.2"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error: "));
}

#[test]
fn binary_exit_codes_and_thread_cap() {
    let bin = env!("CARGO_BIN_EXE_entropy-bounds");
    let osc = spectrum("oscillator.json");
    let ok = Command::new(bin)
        .args([
            "sweep",
            "--spectrum",
            &osc,
            "--E",
            "0.5:2:4",
            "--eps",
            "0.1:0.9:3",
        ])
        .env("ENTROPY_BOUNDS_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let free = Command::new(bin)
        .args([
            "sweep",
            "--spectrum",
            &osc,
            "--E",
            "0.5:2:4",
            "--eps",
            "0.1:0.9:3",
        ])
        .output()
        .unwrap();
    assert_eq!(ok.stdout, free.stdout);
    let bad = Command::new(bin)
        .args(["bound", "--spectrum", &osc, "--E", "0"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
