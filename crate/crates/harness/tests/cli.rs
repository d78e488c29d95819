use std::path::Path;
use std::process::{Command, Output};

use poincare_linear::datagen::{read_dataset, read_truth};
use poincare_linear::geometry::hyperplane_dist;
use poincare_linear::Label;
use serde_json::Value;

fn poincare(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poincare"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = poincare(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    poincare(args).status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &Path, name: &str, extra: &[&str]) -> std::path::PathBuf {
    let path = dir.join(name);
    let mut args = vec!["generate", "--out", s(&path)];
    args.extend_from_slice(extra);
    ok(&args);
    path
}

#[test]
fn generated_files_pass_the_planted_audit() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), "d.csv", &["--n", "1000", "--eps", "0.01", "--p-norm", "0.38", "--seed", "4"]);
    let truth = read_truth(&path.with_extension("truth.json")).unwrap();
    assert_eq!((truth.eps, truth.r, truth.seed), (0.01, 0.95, 4));
    let h = truth.hyperplane().unwrap();
    let data = read_dataset(&path).unwrap();
    assert_eq!(data.len(), 1000);
    for (x, y) in data.ball_points().unwrap().iter().zip(data.binary_labels().unwrap()) {
        assert!(hyperplane_dist(x, &h).unwrap() >= 0.01 * (1.0 - 1e-9));
        assert_eq!(Label::from_score(h.score(x).unwrap()), y);
    }
}

#[test]
fn generation_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--n", "300", "--d", "3", "--seed", "9"];
    let a = generate(dir.path(), "a.csv", &args);
    let b = generate(dir.path(), "b.csv", &args);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(
        std::fs::read(a.with_extension("truth.json")).unwrap(),
        std::fs::read(b.with_extension("truth.json")).unwrap()
    );
    let header = std::fs::read_to_string(&a).unwrap();
    assert!(header.starts_with("x1,x2,x3,label\n"));
}

#[test]
fn impossible_margin_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = poincare(&["generate", "--n", "10", "--eps", "30", "--out", s(&dir.path().join("x.csv"))]);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}

#[test]
fn train_with_truth_writes_record_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "d.csv", &["--n", "2000", "--d", "4", "--eps", "0.1", "--seed", "2"]);
    let out = dir.path().join("run.json");
    ok(&[
        "train",
        "--algo",
        "perceptron",
        "--in",
        s(&data),
        "--truth",
        s(&data.with_extension("truth.json")),
        "--seeds",
        "1..=5",
        "--out",
        s(&out),
    ]);
    let record: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(record["config_hash"].as_str().unwrap().len(), 64);
    let per_seed = record["per_seed"].as_array().unwrap();
    assert_eq!(per_seed.len(), 5);
    for m in per_seed {
        assert_eq!(m["train_accuracy"], 1.0);
        assert_eq!(m["within_bound"], true);
        assert!(m["updates"].as_f64().unwrap() <= m["bound"].as_f64().unwrap());
    }
    assert_eq!(record["aggregate"]["all_within_bound"], true);
    let mean = record["aggregate"]["updates"]["mean"].as_f64().unwrap();
    let direct: f64 = per_seed.iter().map(|m| m["updates"].as_f64().unwrap()).sum::<f64>() / 5.0;
    assert!((mean - direct).abs() < 1e-9);

    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.starts_with("config_hash,algo,seed,"));
}

#[test]
fn train_is_deterministic_apart_from_timing() {
    let args = [
        "train", "--algo", "svm", "--n", "500", "--test-n", "200", "--seeds", "1,2", "--max-iter", "100000",
    ];
    let strip = |text: String| {
        let mut v: Value = serde_json::from_str(&text).unwrap();
        for m in v["per_seed"].as_array_mut().unwrap() {
            m["wall_time_s"] = Value::Null;
        }
        v["aggregate"]["wall_time_s"] = Value::Null;
        v
    };
    assert_eq!(strip(ok(&args)), strip(ok(&args)));
}

#[test]
fn saved_models_evaluate_on_new_data() {
    let dir = tempfile::tempdir().unwrap();
    let train = generate(dir.path(), "train.csv", &["--n", "1000", "--eps", "0.05", "--seed", "3"]);
    let model = dir.path().join("model.json");
    let trained: Value = serde_json::from_str(&ok(&[
        "train", "--algo", "svm", "--in", s(&train), "--seeds", "1", "--max-iter", "200000", "--save-model",
        s(&model),
    ]))
    .unwrap();
    let record: Value = serde_json::from_str(&ok(&["eval", "--model", s(&model), "--in", s(&train)])).unwrap();
    assert_eq!(record["per_seed"][0]["test_accuracy"], trained["per_seed"][0]["train_accuracy"]);
    assert_eq!(record["config"]["algo"], "svm");
    let csv = ok(&["eval", "--model", s(&model), "--in", s(&train), "--format", "csv"]);
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn lorentz_files_train_the_hyperboloid_perceptron() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "l.csv", &["--n", "1000", "--eps", "0.2", "--lorentz", "--seed", "5"]);
    assert!(std::fs::read_to_string(&data).unwrap().starts_with("z0,z1,z2,label\n"));
    let truth = data.with_extension("truth.json");
    let out = ok(&[
        "train", "--algo", "hyperboloid-perceptron", "--in", s(&data), "--truth", s(&truth), "--seeds", "1..=3",
    ]);
    let record: Value = serde_json::from_str(&out).unwrap();
    for m in record["per_seed"].as_array().unwrap() {
        assert_eq!(m["train_accuracy"], 1.0);
        assert_eq!(m["within_bound"], true);
    }
    // Ball learners accept hyperboloid files.
    ok(&["train", "--algo", "perceptron", "--in", s(&data), "--seeds", "1"]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&["train", "--algo", "nonsense", "--n", "10"]), 2);
    assert_eq!(code(&["train", "--algo", "svm"]), 2);
    assert_eq!(code(&["train", "--algo", "svm", "--n", "10", "--seeds", "x"]), 2);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x1,x2,label\n0.1,0.2,1\n1.2,0.0,-1\n").unwrap();
    assert_eq!(code(&["train", "--algo", "svm", "--in", s(&bad), "--seeds", "1"]), 3);
    let missing = dir.path().join("missing.csv");
    assert_ne!(code(&["train", "--algo", "svm", "--in", s(&missing)]), 0);

    let data = generate(dir.path(), "d.csv", &["--n", "3000", "--d", "5", "--eps", "0.001"]);
    assert_eq!(
        code(&["train", "--algo", "perceptron", "--in", s(&data), "--max-epochs", "1", "--seeds", "1"]),
        4
    );
    let multi = dir.path().join("multi.csv");
    std::fs::write(&multi, "x1,x2,label\n0.1,0.2,0\n0.2,0.1,2\n-0.1,0.0,1\n").unwrap();
    assert_eq!(code(&["train", "--algo", "strategic", "--in", s(&multi), "--seeds", "1"]), 2);
}

#[test]
fn bound_command_prints_values() {
    let v: Value = serde_json::from_str(&ok(&["bound", "--kind", "perceptron", "--p-norm", "0.19", "--eps", "1"])).unwrap();
    let b = v["bound"].as_f64().unwrap();
    assert!((b - 594.0).abs() / 594.0 < 0.01, "{b}");
    let strat: Value = serde_json::from_str(&ok(&[
        "bound", "--kind", "strategic", "--p-norm", "0.19", "--eps", "1", "--alpha", "0",
    ]))
    .unwrap();
    assert_eq!(strat["bound"].as_f64().unwrap(), b);
    let csv = ok(&["bound", "--kind", "hyperboloid", "--eps", "0.5", "--radius", "2", "--format", "csv"]);
    let value: f64 = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((value - (2.0 / 0.5f64.sinh()).powi(2)).abs() < 1e-9);
}

#[test]
fn hull_and_refpoint_commands() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "d.csv", &["--n", "400", "--eps", "0.1", "--seed", "6"]);
    let graham: Value = serde_json::from_str(&ok(&["hull", "--in", s(&data)])).unwrap();
    let quick: Value = serde_json::from_str(&ok(&["hull", "--in", s(&data), "--method", "quickhull"])).unwrap();
    let sorted = |v: &Value| {
        v.as_array()
            .unwrap()
            .iter()
            .map(|c| {
                let mut idx: Vec<u64> = c["vertices"].as_array().unwrap().iter().map(|i| i.as_u64().unwrap()).collect();
                idx.sort();
                idx
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(graham.as_array().unwrap().len(), 2);
    assert_eq!(sorted(&graham), sorted(&quick));

    let rp: Value = serde_json::from_str(&ok(&["refpoint", "--in", s(&data)])).unwrap();
    assert_eq!(rp["degenerate"], false);
    let rows = read_dataset(&data).unwrap();
    let pos = rp["pos_row"].as_u64().unwrap() as usize;
    let neg = rp["neg_row"].as_u64().unwrap() as usize;
    assert_eq!(rows.labels()[pos], 1);
    assert_eq!(rows.labels()[neg], -1);
}

#[test]
fn bench_reports_phases() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.json");
    let args = [
        "bench", "--algo", "svm", "--n", "2000", "--test-n", "500", "--seeds", "1..=3", "--max-iter", "50000",
        "--out", s(&out),
    ];
    ok(&args);
    let first: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(first["rows"].as_array().unwrap().len(), 3);
    assert!(first["median_train_s"].as_f64().unwrap() > 0.0);
    ok(&args);
    let second: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for (a, b) in first["rows"].as_array().unwrap().iter().zip(second["rows"].as_array().unwrap()) {
        assert_eq!(a["train_accuracy"], b["train_accuracy"]);
        assert_eq!(a["test_accuracy"], b["test_accuracy"]);
    }
}
