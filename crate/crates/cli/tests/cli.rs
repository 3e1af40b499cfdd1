use std::path::Path;
use std::process::{Command, Output};

fn pairnet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pairnet"))
        .args(args)
        .current_dir(dir)
        .env_remove("PAIRNET_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn gen(dir: &Path, function: &str, split: &str, file: &str) {
    let out = pairnet(dir, &["gen-data", "--function", function, "--split", split, "--out", file]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

/// First number following `label` in `text`.
fn number_after(text: &str, label: &str) -> f64 {
    let rest = &text[text.find(label).unwrap_or_else(|| panic!("`{label}` in {text}")) + label.len()..];
    rest.split(|c: char| c.is_whitespace() || c == ',')
        .find(|s| !s.is_empty())
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn gen_data_reports_rows_and_range() {
    let dir = tempfile::tempdir().unwrap();
    let out = pairnet(dir.path(), &["gen-data", "--function", "f1", "--split", "train", "--out", "f1.csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("8000 rows, target range [4.248, 55.833]"), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("f1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 8001);
    assert_eq!(csv.lines().next(), Some("x1,x2,x3,y"));

    let out = pairnet(dir.path(), &["gen-data", "--function", "f3", "--split", "test", "--out", "f3.csv"]);
    assert!(stdout(&out).starts_with("6859 rows"));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = pairnet(dir.path(), &["gen-data", "--function", "f9", "--split", "train", "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("x.csv").exists());
    let out = pairnet(dir.path(), &["bench", "--table", "3", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fit_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen(d, "f2", "train", "train.csv");
    let out = pairnet(
        d,
        &[
            "--report", "run.json", "fit", "--data", "train.csv", "--partition", "6,6,6", "--alphas", "0.1,0.1,0.8",
            "--model-out", "model.json",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("216 subspaces"), "{text}");
    let train_mse = number_after(&text, "train MSE");
    // Same order of magnitude as the published 0.0018.
    assert!((0.00018..0.018).contains(&train_mse), "{train_mse}");
    assert!(d.join("model.report.csv").exists());

    let eval = stdout(&pairnet(d, &["eval", "--model", "model.json", "--data", "train.csv"]));
    assert_eq!(number_after(&eval, "MSE").to_bits(), train_mse.to_bits());

    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("run.json")).unwrap()).unwrap();
    assert_eq!(report["metrics"]["train_mse"].as_f64(), Some(train_mse));
    assert!(report["timings"]["fit_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(report["config"]["partition"], "6-6-6");
    assert_eq!(report["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn single_subspace_partition() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "f1", "train", "train.csv");
    let out = pairnet(dir.path(), &["fit", "--data", "train.csv", "--partition", "1,1,1", "--model-out", "m.json"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("(1 subspaces)"));
}

#[test]
fn invalid_alphas_fail_before_work() {
    let dir = tempfile::tempdir().unwrap();
    // The data file does not exist: validation must reject the weights first.
    let out = pairnet(
        dir.path(),
        &["fit", "--data", "missing.csv", "--partition", "2,2,2", "--alphas", "0.1,0.1,0.7", "--model-out", "m.json"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sum"));
    assert!(!dir.path().join("m.json").exists());
}

#[test]
fn runtime_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "f1", "train", "train.csv");
    let out = pairnet(dir.path(), &["eval", "--model", "absent.json", "--data", "train.csv"]);
    assert_eq!(out.status.code(), Some(1));
    std::fs::write(dir.path().join("broken.json"), "{\"format_version\": 1, \"n\":").unwrap();
    let out = pairnet(dir.path(), &["eval", "--model", "broken.json", "--data", "train.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn select_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen(d, "f3", "train", "train.csv");
    for (board, threads) in [("a.csv", "1"), ("b.csv", "3")] {
        let out = Command::new(env!("CARGO_BIN_EXE_pairnet"))
            .args(["select", "--data", "train.csv", "--candidates", "3", "--seed", "11", "--leaderboard", board])
            .current_dir(d)
            .env("PAIRNET_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read_to_string(d.join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read_to_string(d.join("b.csv")).unwrap());
    assert_eq!(a.lines().count(), 5);
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pairnet"))
        .args(["gen-data", "--function", "f1", "--split", "train", "--out", "f.csv"])
        .current_dir(dir.path())
        .env("PAIRNET_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_table2_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = pairnet(dir.path(), &["bench", "--table", "2", "--out", "results"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("results/table2.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 9);
    assert!(lines.iter().all(|l| l.split(',').count() == 8));
    assert!(lines[8].starts_with("6-6-6,216,"));
}

#[test]
fn bench_table1_with_small_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = pairnet(
        dir.path(),
        &[
            "bench", "--table", "1", "--out", "results", "--candidates", "1", "--epochs", "1", "--layers", "2",
            "--width", "4", "--mlp-runs", "2",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("results/table1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.starts_with("method,function,train_seconds,train_mse,test_mse,detail\nPairNet,f1,"));
    let history = std::fs::read_to_string(dir.path().join("results/mlp_history_f2.csv")).unwrap();
    assert_eq!(history.lines().count(), 2);
}
