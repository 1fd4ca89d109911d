use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{name}.schema.json"));
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn assert_valid(schema_name: &str, doc: &Value) {
    let validator = jsonschema::validator_for(&schema(schema_name)).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:?}");
}

fn mixsep(cache: &TempDir, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixsep"))
        .args(args)
        .env("MIXSEP_CACHE_DIR", cache.path())
        .output()
        .unwrap()
}

fn ok(out: &Output) -> &[u8] {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    &out.stdout
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(ok(out)).unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn estimate_on_setting_ii_fixture() {
    let cache = TempDir::new().unwrap();
    let input = fixture("setting_ii_n5000.csv");
    let report = json_of(&mixsep(&cache, &["estimate", path_str(&input), "--signal"]));
    assert_valid("estimate", &report);
    let elbow = report["alpha_tilde_elbow"].as_f64().unwrap();
    assert!((0.06..=0.14).contains(&elbow), "{elbow}");
    let lower = report["lower_bound"]["alpha_lower"].as_f64().unwrap();
    assert!(lower > 0.0 && lower <= report["alpha_hat_cn"].as_f64().unwrap());
    assert_eq!(report["n"], 5000);
    assert_eq!(report["provenance"]["input_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn estimate_with_tabulated_background() {
    let cache = TempDir::new().unwrap();
    let table = format!("table:{}", fixture("velocity_background.csv").display());
    let input = fixture("velocity_synthetic.csv");
    let report = json_of(&mixsep(
        &cache,
        &["estimate", path_str(&input), "--column", "velocity", "--background", &table],
    ));
    assert_valid("estimate", &report);
    let elbow = report["alpha_tilde_elbow"].as_f64().unwrap();
    assert!((0.2..=0.4).contains(&elbow), "{elbow}");
}

#[test]
fn input_errors_exit_with_code_two() {
    let cache = TempDir::new().unwrap();
    let dir = TempDir::new().unwrap();

    let out = mixsep(&cache, &["estimate", path_str(&dir.path().join("missing.csv"))]);
    assert_eq!(out.status.code(), Some(2));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "x\n0.1\n0.2\nabc\n0.4\noops\n").unwrap();
    let out = mixsep(&cache, &["estimate", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line 4"), "{msg}");

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "x\n").unwrap();
    assert_eq!(mixsep(&cache, &["estimate", path_str(&empty)]).status.code(), Some(2));

    let out = mixsep(&cache, &["estimate", path_str(&fixture("setting_ii_n5000.csv")), "--background", "gamma:2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn values_outside_uniform_support_warn() {
    let cache = TempDir::new().unwrap();
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("wide.csv");
    let mut body = String::from("x\n");
    for i in 0..200 {
        body.push_str(&format!("{}\n", i as f64 / 100.0 - 0.5));
    }
    fs::write(&input, body).unwrap();
    let out = mixsep(&cache, &["estimate", path_str(&input)]);
    let report = json_of(&out);
    let warnings = report["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("outside the background support")));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning:"));
}

#[test]
fn curve_csv_shape() {
    let cache = TempDir::new().unwrap();
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("curve.csv");
    ok(&mixsep(
        &cache,
        &[
            "curve",
            path_str(&fixture("setting_ii_n5000.csv")),
            "--grid",
            "150",
            "-o",
            path_str(&out_path),
        ],
    ));
    let rows = read_csv(&out_path);
    assert_eq!(rows.len(), 150);
    let crit: Vec<f64> = rows.iter().map(|r| num(&r[1])).collect();
    assert!(crit.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    let last = &rows[rows.len() - 1];
    assert_eq!(num(&last[0]), 1.0);
    assert_eq!(num(&last[1]), 0.0);
    assert!(last[2].is_empty());
    assert!(rows[..rows.len() - 1].iter().all(|r| !r[2].is_empty()));
}

#[test]
fn signal_outputs() {
    let cache = TempDir::new().unwrap();
    let dir = TempDir::new().unwrap();
    let out = mixsep(
        &cache,
        &["signal", path_str(&fixture("setting_ii_n5000.csv")), "--out-dir", path_str(dir.path())],
    );
    ok(&out);
    for f in ["fs_step.csv", "fs_concave.csv", "density.csv", "lfdr.csv", "signal.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let report: Value = serde_json::from_slice(&fs::read(dir.path().join("signal.json")).unwrap()).unwrap();
    assert_valid("signal", &report);

    let density: Vec<f64> = read_csv(&dir.path().join("density.csv")).iter().map(|r| num(&r[2])).collect();
    assert!(!density.is_empty());
    assert!(density.windows(2).all(|w| w[1] <= w[0]));

    let lfdr: Vec<f64> = read_csv(&dir.path().join("lfdr.csv")).iter().map(|r| num(&r[1])).collect();
    assert!(!lfdr.is_empty());
    assert!(lfdr.iter().all(|v| (0.0..=1.0).contains(v)));

    let step: Vec<f64> = read_csv(&dir.path().join("fs_step.csv")).iter().map(|r| num(&r[1])).collect();
    assert!(step.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(step[step.len() - 1], 1.0);
}

#[test]
fn signal_with_fixed_proportion() {
    let cache = TempDir::new().unwrap();
    let dir = TempDir::new().unwrap();
    ok(&mixsep(
        &cache,
        &[
            "signal",
            path_str(&fixture("setting_ii_n5000.csv")),
            "--out-dir",
            path_str(dir.path()),
            "--alpha-source",
            "value",
            "--alpha",
            "0.1",
        ],
    ));
    let report: Value = serde_json::from_slice(&fs::read(dir.path().join("signal.json")).unwrap()).unwrap();
    assert_eq!(report["alpha_used"].as_f64().unwrap(), 0.1);
    assert_eq!(report["alpha_source"], "value");
}

#[test]
fn simulate_runs_and_is_deterministic() {
    let cache = TempDir::new().unwrap();
    let a = TempDir::new().unwrap();
    let config = fixture("simulate_scenario_a.toml");
    let first = ok(&mixsep(&cache, &["simulate", path_str(&config), "--out-dir", path_str(a.path())])).to_vec();
    assert!(first.is_empty());
    let metrics: Value = serde_json::from_slice(&fs::read(a.path().join("metrics.json")).unwrap()).unwrap();
    assert_valid("metrics", &metrics);
    let rows = metrics["metrics"]["rows"].as_array().unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r["estimator"].as_str().unwrap()).collect();
    assert_eq!(names, ["cn_tau_0.1", "cn_tau_0.5", "elbow", "lower_bound"]);

    let csv1 = fs::read(a.path().join("metrics.csv")).unwrap();
    let stdout = ok(&mixsep(&cache, &["simulate", path_str(&config)])).to_vec();
    assert_eq!(csv1, stdout);
    let other = ok(&mixsep(&cache, &["simulate", path_str(&config), "--seed", "9"])).to_vec();
    assert_ne!(csv1, other);
}

#[test]
fn identifiability_reports() {
    let cache = TempDir::new().unwrap();
    let report = json_of(&mixsep(
        &cache,
        &["identifiability", "--alpha", "0.3", "--signal", "poisson:2", "--background", "poisson:1"],
    ));
    assert_valid("identifiability", &report);
    assert!((report["alpha0"].as_f64().unwrap() - 0.18964).abs() < 1e-5);
    assert_eq!(report["method"], "discrete");
    assert_eq!(report["identifiable"], false);

    let report = json_of(&mixsep(
        &cache,
        &["identifiability", "--alpha", "0.3", "--signal", "normal:2,1", "--background", "normal:0,1"],
    ));
    assert_valid("identifiability", &report);
    assert_eq!(report["identifiable"], true);

    let report = json_of(&mixsep(
        &cache,
        &["identifiability", "--alpha", "0.3", "--signal", "normal:0,1", "--background", "normal:0,1"],
    ));
    assert!(report["alpha0"].as_f64().unwrap().abs() < 1e-9);

    let report = json_of(&mixsep(
        &cache,
        &[
            "identifiability",
            "--alpha",
            "0.5",
            "--signal",
            "normal:2,1",
            "--signal-kappa",
            "0.6",
            "--signal-discrete",
            "poisson:3",
            "--background",
            "normal:0,1",
            "--background-kappa",
            "0.6",
            "--background-discrete",
            "poisson:1",
        ],
    ));
    assert_valid("identifiability", &report);
    assert_eq!(report["method"], "mixed");
}

#[test]
fn generate_is_reproducible() {
    // fixtures were written by a release build; other profiles may differ in the last bit
    let same_values = |out: &[u8], name: &str| {
        let parse = |b: &[u8]| -> Vec<f64> { String::from_utf8_lossy(b).lines().skip(1).map(num).collect() };
        let (a, b) = (parse(out), parse(&fs::read(fixture(name)).unwrap()));
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-14 * y.abs().max(1e-300), "{name}: {x} vs {y}");
        }
    };
    let cache = TempDir::new().unwrap();
    let args = ["generate", "--scenario", "setting-ii", "--n", "5000", "--alpha", "0.1", "--seed", "20240"];
    let out = ok(&mixsep(&cache, &args)).to_vec();
    assert_eq!(out, ok(&mixsep(&cache, &args)).to_vec());
    same_values(&out, "setting_ii_n5000.csv");
    let args = ["generate", "--scenario", "a", "--n", "2000", "--alpha", "0.1", "--j", "10", "--seed", "31337"];
    let out = ok(&mixsep(&cache, &args)).to_vec();
    same_values(&out, "scenario_a_pvalues.csv");
    assert_eq!(mixsep(&cache, &["generate", "--scenario", "b", "--n", "0", "--alpha", "0.1"]).status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let cache = TempDir::new().unwrap();
    let input = fixture("scenario_a_pvalues.csv");
    let args = ["estimate", path_str(&input), "--critical", "monte-carlo", "--mc-reps", "2000", "--signal"];
    let first = ok(&mixsep(&cache, &args)).to_vec();
    // the second run reads the cached quantile
    let second = ok(&mixsep(&cache, &args)).to_vec();
    assert_eq!(first, second);
    let fresh = TempDir::new().unwrap();
    assert_eq!(first, ok(&mixsep(&fresh, &args)).to_vec());
}

#[test]
fn thread_count_does_not_change_results() {
    let input = fixture("scenario_a_pvalues.csv");
    let run = |threads: &str| {
        let cache = TempDir::new().unwrap();
        let mut report = json_of(&mixsep(
            &cache,
            &["--threads", threads, "estimate", path_str(&input), "--critical", "monte-carlo", "--mc-reps", "2000"],
        ));
        report.as_object_mut().unwrap().remove("provenance");
        report
    };
    assert_eq!(run("1"), run("4"));

    let config = fixture("simulate_scenario_a.toml");
    let sim = |threads: &str| {
        let cache = TempDir::new().unwrap();
        ok(&mixsep(&cache, &["--threads", threads, "simulate", path_str(&config)])).to_vec()
    };
    assert_eq!(sim("1"), sim("3"));
}
