use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn kahler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kahler"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .display()
        .to_string()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

#[test]
fn verify_axioms_small_run_passes() {
    let out = kahler(&[
        "verify", "--suite", "axioms", "--dims", "4", "--trials", "100", "--seed", "1",
    ]);
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["passed"], true);
    assert_eq!(r["suite"], "axioms");
    assert_eq!(r["dimensions"], serde_json::json!([4]));
    assert!(r["max_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn unknown_suite_is_an_error() {
    let out = kahler(&["verify", "--suite", "nope"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn zero_trials_is_an_error() {
    assert!(!kahler(&["verify", "--suite", "axioms", "--trials", "0"])
        .status
        .success());
}

#[test]
fn failing_report_sets_exit_status() {
    let out = kahler(&[
        "verify",
        "--suite",
        "born",
        "--dims",
        "2",
        "--trials",
        "5",
        "--born-rank-divisor",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn verify_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = kahler(&[
        "verify",
        "--suite",
        "groups",
        "--dims",
        "1,2",
        "--trials",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["passed"], true);
}

#[test]
fn unwritable_output_is_an_error() {
    let out = kahler(&[
        "verify",
        "--suite",
        "axioms",
        "--trials",
        "1",
        "--out",
        "/nonexistent/dir/r.json",
    ]);
    assert!(!out.status.success());
}

#[test]
fn spectral_k4_example_has_two_double_eigenvalues() {
    let kappa = (4.0f64 * 0.49 + 1.0 + 0.6 + 1.0 + 0.09).sqrt();
    let expected = [(0.7 - kappa) / 2.0, (0.7 + kappa) / 2.0];
    for method in ["structured", "closed-form", "dense"] {
        let out = kahler(&["spectral", "--input", &data("k4_operator.json"), "--method", method]);
        assert!(out.status.success(), "{method}");
        let r = json(&out);
        let values: Vec<f64> = r["eigenvalues"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        assert_eq!(values.len(), 2);
        for (v, e) in values.iter().zip(expected) {
            assert!((v - e).abs() < 1e-12, "{method}: {v} vs {e}");
        }
        assert_eq!(r["multiplicities"], serde_json::json!([2, 2]));
        let projectors = r["projectors"].as_array().unwrap();
        assert_eq!(projectors.len(), 2);
        assert_eq!(projectors[0].as_array().unwrap().len(), 4);
    }
}

#[test]
fn spectral_accepts_complex_operator_format() {
    let a = json(&kahler(&["spectral", "--input", &data("k4_operator.json")]));
    let b = json(&kahler(&["spectral", "--input", &data("k4_complex.json")]));
    assert_eq!(a["eigenvalues"], b["eigenvalues"]);
}

#[test]
fn spectral_rejects_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"n": 2, "S": [[1, 2], [3, 4]], "A": [[0, 0], [0, 0]]}"#).unwrap();
    assert!(!kahler(&["spectral", "--input", path.to_str().unwrap()])
        .status
        .success());
    std::fs::write(&path, "not json").unwrap();
    assert!(!kahler(&["spectral", "--input", path.to_str().unwrap()])
        .status
        .success());
}

#[test]
fn correlate_sigma_x_example() {
    let out = kahler(&["correlate", "--query", &data("sigma_x_query.json")]);
    assert!(out.status.success());
    let r = json(&out);
    assert!((r["value"]["re"].as_f64().unwrap() - 1.0).abs() < 1e-13);
    assert!(r["value"]["im"].as_f64().unwrap().abs() < 1e-13);
    assert!(r["residual"].as_f64().unwrap() < 1e-13);
}

#[test]
fn simulate_bell_frequencies() {
    let out = kahler(&["simulate", "bell", "--shots", "100000", "--seed", "7"]);
    assert!(out.status.success());
    let r = json(&out);
    for k in ["00", "11"] {
        assert!((r["frequencies"][k].as_f64().unwrap() - 0.5).abs() < 0.01);
    }
    for k in ["01", "10"] {
        assert!(r["frequencies"][k].as_f64().unwrap() <= 0.001);
    }
    let again = json(&kahler(&["simulate", "bell", "--shots", "100000", "--seed", "7"]));
    assert_eq!(r, again);
}

#[test]
fn group_check_reports_memberships() {
    let r = json(&kahler(&["group", "check", "--input", &data("hadamard_lift.json")]));
    assert_eq!(
        r["memberships"],
        serde_json::json!(["orthogonal", "symplectic", "j-commuting", "kahler-unitary"])
    );
    let r = json(&kahler(&["group", "check", "--input", &data("reflection.json")]));
    assert_eq!(r["memberships"], serde_json::json!(["orthogonal"]));
}

#[test]
fn bench_records_and_empty_dims() {
    let r = json(&kahler(&["bench", "--dims", "2,4", "--trials", "2", "--seed", "3"]));
    let recs = r.as_array().unwrap();
    assert_eq!(recs.len(), 4);
    assert!(recs.iter().all(|x| x["residual"].as_f64().unwrap() < 1e-9));
    let again = json(&kahler(&["bench", "--dims", "2,4", "--trials", "2", "--seed", "3"]));
    let residuals = |v: &Value| {
        v.as_array()
            .unwrap()
            .iter()
            .map(|x| x["residual"].clone())
            .collect::<Vec<_>>()
    };
    assert_eq!(residuals(&r), residuals(&again));
    assert_eq!(json(&kahler(&["bench", "--dims", ""])), serde_json::json!([]));
}
