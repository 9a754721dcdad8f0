use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_momentflow")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn propagate_reports_every_layer() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.json");
    let o = run(&["--command", "propagate", "--network", path(&fixture("two_layer_gelu.json")), "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let layers = read_json(&out)["layers"].as_array().unwrap().clone();
    assert_eq!(layers.len(), 2);
    assert_eq!(layers[0]["mean"].as_array().unwrap().len(), 3);
    assert_eq!(layers[1]["cov"].as_array().unwrap().len(), 1);
}

#[test]
fn sine_fixture_variance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    for s2 in [0.5f64, 1.0, 4.0] {
        let cov = s2.to_string();
        let o = run(&["--command", "propagate", "--network", path(&fixture("sine.json")), "--input-cov", &cov, "--out", path(&out)]);
        assert!(o.status.success());
        let v = read_json(&out)["layers"][0]["variance"][0].as_f64().unwrap();
        assert!((v - (1.0 - (-2.0 * s2).exp()) / 2.0).abs() < 1e-15, "{v}");
    }
}

#[test]
fn mismatched_dimensions_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("bad.json");
    std::fs::write(
        &net,
        r#"{"layers":[
            {"kind":"relu","a":[[1,0],[0,1],[1,1]],"b":[0,0,0],"c":[[0,0],[0,0],[0,0]],"d":[0,0,0]},
            {"kind":"relu","a":[[1,1,1,1]],"b":[0],"c":[[0,0,0,0]],"d":[0]}]}"#,
    )
    .unwrap();
    let o = run(&["--command", "propagate", "--network", path(&net), "--out", path(&dir.path().join("o.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("layer 1: expected input dim 4"));

    let o = run(&["--command", "propagate", "--network", path(&fixture("sine.json")), "--input-mean", "0,0", "--out", "x"]);
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(&net, "{ not json").unwrap();
    let o = run(&["--command", "propagate", "--network", path(&net), "--out", "x"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["--command", "benchmark", "--architecture", "wide", "--out", "x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn non_power_of_two_sample_count_is_rejected() {
    let o = run(&["--command", "benchmark", "--network", path(&fixture("sine.json")), "--samples", "1000", "--out", "x"]);
    assert_eq!(o.status.code(), Some(2));
}

fn benchmark(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let out = dir.join(name);
    let mut args = vec!["--command", "benchmark", "--samples", "1024", "--replicates", "3", "--out", path(&out)];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn benchmark_writes_six_rows_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = benchmark(
        dir.path(),
        "wide.csv",
        &["--architecture", "wide", "--activation", "sine", "--variance", "small", "--seed", "3"],
    );
    let text = std::fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "method,mean,variance,wasserstein,wasserstein_se,kl_y1_to_m,kl_m_to_y1,kl_se");
    let methods: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(methods, ["pseudo-true", "analytic", "mean-field", "linear", "unscented95", "unscented02"]);
}

#[test]
fn step_ensemble_linear_row_is_infinite() {
    let dir = tempfile::tempdir().unwrap();
    let out = benchmark(
        dir.path(),
        "step.json",
        &["--architecture", "deep", "--activation", "heaviside", "--variance", "medium", "--format", "json"],
    );
    let rows = read_json(&out)["rows"].as_array().unwrap().clone();
    assert_eq!(rows[3]["method"], "linear");
    assert_eq!(rows[3]["kl_y1_to_m"], "inf");
    assert!(rows[1]["kl_y1_to_m"].is_f64());
}

#[test]
fn compare_summarises_reports() {
    let dir = tempfile::tempdir().unwrap();
    let reports = dir.path().join("reports");
    std::fs::create_dir(&reports).unwrap();
    let net = fixture("two_layer_gelu.json");
    benchmark(&reports, "a.csv", &["--network", path(&net), "--seed", "1"]);
    let out = dir.path().join("one.csv");
    assert!(run(&["--command", "compare", "--reports", path(&reports), "--out", path(&out)]).status.success());
    for line in std::fs::read_to_string(&out).unwrap().lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[1], "1");
        assert!(f[2..].iter().all(|v| *v == f[2]), "{line}");
    }

    benchmark(&reports, "b.csv", &["--network", path(&net), "--seed", "2"]);
    benchmark(&reports, "c.csv", &["--network", path(&net), "--seed", "3"]);
    std::fs::write(reports.join("notes.csv"), "x,y\n1,2\n").unwrap();
    assert!(run(&["--command", "compare", "--reports", path(&reports), "--out", path(&out)]).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("method,reports,min,q25,median,q75,max\n"));
    assert_eq!(text.lines().count(), 7);
    for line in text.lines().skip(1) {
        let f: Vec<f64> = line.split(',').skip(2).map(|v| v.parse().unwrap()).collect();
        assert!(f.windows(2).all(|w| w[0] <= w[1]), "{line}");
        assert_eq!(line.split(',').nth(1), Some("3"));
    }
}

#[test]
fn benchmark_side_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let bounds = dir.path().join("bounds.csv");
    let hist = dir.path().join("hist.csv");
    benchmark(
        dir.path(),
        "r.csv",
        &["--network", path(&fixture("two_layer_gelu.json")), "--bounds", path(&bounds), "--histogram", path(&hist)],
    );
    let b = std::fs::read_to_string(bounds).unwrap();
    assert_eq!(b.lines().count(), 3);
    let h = std::fs::read_to_string(hist).unwrap();
    assert_eq!(h.lines().count(), 51);
    let total: u64 = h.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 3 * 1024);
}

#[test]
fn network_files_round_trip_bitwise() {
    let original = momentflow::ensembles::build_custom(momentflow::ActivationKind::Gelu, true, 3, 5, 17);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("net.json");
    original.save(&p).unwrap();
    assert_eq!(momentflow::Network::load(&p).unwrap(), original);
}
