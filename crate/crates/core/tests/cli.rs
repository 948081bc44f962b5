use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_csl-limits"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn schema(name: &str) -> jsonschema::JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    let value: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::JSONSchema::compile(&value).unwrap()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn assert_valid(schema: &jsonschema::JSONSchema, v: &Value) {
    if let Err(errors) = schema.validate(v) {
        let msgs: Vec<String> = errors.map(|e| e.to_string()).collect();
        panic!("schema violations: {msgs:?}\n{v}");
    }
}

fn error_exit(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let code = out.status.code().unwrap();
    let err: Value = serde_json::from_slice(&out.stderr).expect("stderr is a JSON error object");
    assert_eq!(err["error"]["exit_code"], code);
    (code, err)
}

#[test]
fn limit_from_published_totals() {
    let v = ok_json(&["limit", "--y-total", "130", "--bins", "15:48:1", "--r-c", "1e-7", "--cl", "0.95"]);
    assert_valid(&schema("bayes_limit.schema.json"), &v);
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    assert_eq!(arr[0]["coupling"], "mass-prop");
    assert_eq!(arr[1]["coupling"], "non-mass-prop");

    let single = ok_json(&["limit", "--y-total", "130", "--bins", "15:48:1", "--coupling", "mass-prop"]);
    assert_valid(&schema("bayes_limit.schema.json"), &single);
    assert_eq!(single, arr[0]);
}

#[test]
fn chi2_limits_validate() {
    let schema = schema("chi2_limit.schema.json");
    let direct = ok_json(&["limit", "--method", "chi2", "--alpha-upper", "143"]);
    assert_valid(&schema, &direct);
    let fitted = ok_json(&["limit", "--method", "chi2", "--input", fixture("synth_igex_like.csv").to_str().unwrap()]);
    assert_valid(&schema, &fitted);
    assert!(fitted[0]["alpha_hat"].is_number());
}

#[test]
fn fit_output_validates() {
    let v = ok_json(&["fit", "--input", fixture("synth_igex_like.csv").to_str().unwrap()]);
    assert_valid(&schema("fit_result.schema.json"), &v);
}

#[test]
fn coverage_output_validates() {
    let v = ok_json(&["coverage", "--trials", "50", "--seed", "7"]);
    assert_valid(&schema("coverage_report.schema.json"), &v);
    assert_eq!(v["trials"], 50);
    assert_eq!(v["seed"], 7);
}

#[test]
fn validation_errors_exit_2() {
    let (code, err) = error_exit(&["limit", "--y-total", "130", "--bins", "15:48:1", "--cl", "1.5"]);
    assert_eq!(code, 2);
    assert_eq!(err["error"]["kind"], "validation");

    let (code, _) = error_exit(&["limit", "--y-total", "130", "--bins", "15:48:1", "--r-c=-1"]);
    assert_eq!(code, 2);

    let (code, err) = error_exit(&[
        "fit",
        "--input",
        fixture("sparse_tail.csv").to_str().unwrap(),
        "--emin",
        "40",
        "--emax",
        "48.5",
    ]);
    assert_eq!(code, 2);
    assert_eq!(err["error"]["kind"], "selection_empty");
}

#[test]
fn missing_input_exits_3() {
    let (code, err) = error_exit(&["fit", "--input", "/nonexistent/spectrum.csv"]);
    assert_eq!(code, 3);
    assert_eq!(err["error"]["kind"], "io");
}

#[test]
fn unknown_flags_are_usage_errors() {
    let out = run(&["limit", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn synth_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = run(&["synth", "--alpha", "115", "--seed", "42", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert_eq!(bytes, std::fs::read(fixture("synth_igex_like.csv")).unwrap());
}

#[test]
fn synth_zero_alpha_is_empty_spectrum() {
    let out = run(&["synth", "--alpha", "0"]);
    assert!(out.status.success());
    let s = csl_limits::BinnedSpectrum::from_reader(&out.stdout[..]).unwrap();
    assert_eq!(s.len(), 34);
    assert!(s.bins().iter().all(|b| b.counts == 0));
}

#[test]
fn scan_writes_both_curves_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("curves.csv");
    let svg = dir.path().join("plot.svg");
    let summary = ok_json(&[
        "scan",
        "--y-total",
        "130",
        "--bins",
        "15:48:1",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(summary["rows"], 400);
    let curves = csl_limits::scan::read_curves(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(curves.len(), 2);
    assert!(curves.iter().all(|c| c.points.len() == 200));
    let plot = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(plot.matches("<polyline").count(), 2);

    let overlay = dir.path().join("overlay.csv");
    std::fs::write(&overlay, "r_c_m,lambda_s_inv\n1e-8,1e-6\n1e-6,1e-10\n1e-4,1e-14\n").unwrap();
    ok_json(&[
        "scan",
        "--y-total",
        "130",
        "--bins",
        "15:48:1",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
        "--overlay",
        overlay.to_str().unwrap(),
    ]);
    let plot = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(plot.matches("<polyline").count(), 3);
}

#[test]
fn single_point_grid_matches_limit() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("one.csv");
    ok_json(&[
        "scan",
        "--y-total",
        "130",
        "--bins",
        "15:48:1",
        "--coupling",
        "mass-prop",
        "--grid",
        "1e-7",
        "--out",
        csv.to_str().unwrap(),
    ]);
    let limit = ok_json(&["limit", "--y-total", "130", "--bins", "15:48:1", "--coupling", "mass-prop"]);
    let curves = csl_limits::scan::read_curves(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(curves.len(), 1);
    assert_eq!(curves[0].points.len(), 1);
    assert_eq!(curves[0].points[0].lambda_limit, limit["lambda_upper_s_inv"].as_f64().unwrap());
}

#[test]
fn config_file_overrides_exposure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# half exposure\nexposure_kg_day = 40\n").unwrap();
    let base = ok_json(&["limit", "--method", "chi2", "--alpha-upper", "143", "--coupling", "mass-prop"]);
    let half = ok_json(&[
        "limit",
        "--method",
        "chi2",
        "--alpha-upper",
        "143",
        "--coupling",
        "mass-prop",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    let ratio = half["lambda_upper_s_inv"].as_f64().unwrap() / base["lambda_upper_s_inv"].as_f64().unwrap();
    assert!((ratio - 2.0).abs() < 1e-12);

    let flag = ok_json(&[
        "limit",
        "--method",
        "chi2",
        "--alpha-upper",
        "143",
        "--coupling",
        "mass-prop",
        "--config",
        cfg.to_str().unwrap(),
        "--exposure-kg-day",
        "80",
    ]);
    assert_eq!(flag, base);
}
