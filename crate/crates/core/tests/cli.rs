use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use msi_tree::make_error_point_dataset;
use tempfile::TempDir;

fn msi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msi"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stats(line: &str) -> HashMap<String, String> {
    line.split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn train(data: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "train",
        "--data",
        path_str(data),
        "--label",
        "label",
        "--out",
        path_str(out),
    ];
    args.extend_from_slice(extra);
    msi(&args)
}

#[test]
fn msi_on_pure_labels_writes_a_single_leaf() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "pure.csv", "a,b,label\n1,2,1\n3,4,1\n5,6,1\n");
    let model = dir.path().join("m.tree");
    let o = train(&data, &model, &[]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&model).unwrap();
    assert!(text.contains("def tree{}:\n    return 1\n"));
    assert_eq!(text.matches("return").count(), 1);
    let s = stats(&stdout(&o));
    assert_eq!(s["nodes"], "1");
    assert_eq!(s["train_accuracy"], "1");
}

#[test]
fn greedy_flags_are_rejected_for_msi() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "d.csv", "x,label\n1,0\n2,1\n");
    let model = dir.path().join("m.tree");
    for flag in [
        ["--min-samples-leaf", "5"],
        ["--min-samples-split", "3"],
        ["--max-depth", "2"],
    ] {
        let o = train(&data, &model, &flag);
        assert_eq!(o.status.code(), Some(2), "{flag:?}");
    }
    let o = train(&data, &model, &["--algo", "greedy", "--compressor", "zlib"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!model.exists());
}

#[test]
fn usage_and_runtime_errors_have_distinct_codes() {
    assert_eq!(msi(&[]).status.code(), Some(2));
    assert_eq!(
        msi(&["bench", "--study", "nope", "--out", "/tmp/x"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        msi(&[
            "train",
            "--data",
            "x.csv",
            "--label",
            "label",
            "--out",
            "m",
            "--compressor",
            "gzip"
        ])
        .status
        .code(),
        Some(2)
    );
    let dir = TempDir::new().unwrap();
    let o = train(&dir.path().join("missing.csv"), &dir.path().join("m"), &[]);
    assert_eq!(o.status.code(), Some(1));
    let bad = write(&dir, "bad.csv", "x,label\n1,0\nNaN,1\n");
    let o = train(&bad, &dir.path().join("m"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 3"));
}

#[test]
fn greedy_grows_more_than_msi_on_error_point_data() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("ep.csv");
    make_error_point_dataset(3).write_csv(&data).unwrap();
    let m = train(
        &data,
        &dir.path().join("msi.tree"),
        &["--trace", path_str(&dir.path().join("trace.csv"))],
    );
    let g = train(
        &data,
        &dir.path().join("greedy.tree"),
        &["--algo", "greedy", "--min-samples-split", "5"],
    );
    assert!(m.status.success() && g.status.success());
    let (m, g) = (stats(&stdout(&m)), stats(&stdout(&g)));
    assert!(g["nodes"].parse::<usize>().unwrap() > m["nodes"].parse::<usize>().unwrap());
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(
        trace.lines().count(),
        1 + m["steps"].parse::<usize>().unwrap()
    );
}

#[test]
fn predict_and_eval_agree_with_training_stats() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("ep.csv");
    make_error_point_dataset(1).write_csv(&data).unwrap();
    let model = dir.path().join("m.tree");
    let t = stats(&stdout(&train(&data, &model, &[])));

    let preds = dir.path().join("p.csv");
    let o = msi(&[
        "predict",
        "--model",
        path_str(&model),
        "--data",
        path_str(&data),
        "--label",
        "label",
        "--out",
        path_str(&preds),
    ]);
    assert!(o.status.success());
    let predicted: Vec<usize> = std::fs::read_to_string(&preds)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(predicted.len(), 101);
    let labels = make_error_point_dataset(1).labels().to_vec();
    let correct = predicted
        .iter()
        .zip(&labels)
        .filter(|(p, l)| p == l)
        .count();
    assert_eq!(
        1.0 - (101 - correct) as f64 / 101.0,
        t["train_accuracy"].parse::<f64>().unwrap()
    );

    let e = stdout(&msi(&[
        "eval",
        "--model",
        path_str(&model),
        "--data",
        path_str(&data),
        "--label",
        "label",
    ]));
    let first = stats(e.lines().next().unwrap());
    assert_eq!(first["accuracy"], t["train_accuracy"]);
    let total: usize = e
        .lines()
        .skip(1)
        .map(|l| stats(l)["count"].parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 101);
}

#[test]
fn eval_of_majority_and_perfect_models() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "d.csv", "x,label\n1,0\n2,0\n3,0\n4,1\n5,1\n");
    let leaf = write(&dir, "leaf.tree", "def tree{}:\n    return 0\n");
    let e = stdout(&msi(&[
        "eval",
        "--model",
        path_str(&leaf),
        "--data",
        path_str(&data),
        "--label",
        "label",
    ]));
    assert!(e.starts_with("accuracy=0.6 "), "{e}");
    assert!(e.contains("confusion actual=1 predicted=0 count=2"));
    let perfect = write(
        &dir,
        "p.tree",
        "def tree{X1}:\n    if X1 <= 3.5:\n        return 0\n    else:\n        return 1\n",
    );
    let e = stdout(&msi(&[
        "eval",
        "--model",
        path_str(&perfect),
        "--data",
        path_str(&data),
        "--label",
        "label",
    ]));
    assert!(e.starts_with("accuracy=1 "), "{e}");

    let o = msi(&[
        "predict",
        "--model",
        path_str(&leaf),
        "--data",
        path_str(&data),
        "--label",
        "label",
    ]);
    assert_eq!(stdout(&o), "prediction\n0\n0\n0\n0\n0\n");
}

#[test]
fn bad_models_are_reported() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "d.csv", "x,label\n1,0\n2,1\n");
    let wide = write(
        &dir,
        "w.tree",
        "def tree{X3}:\n    if X3 <= 1:\n        return 0\n    else:\n        return 1\n",
    );
    let o = msi(&[
        "predict",
        "--model",
        path_str(&wide),
        "--data",
        path_str(&data),
        "--label",
        "label",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("X3"));
    let broken = write(&dir, "b.tree", "def tree{}:\nreturn 0\n");
    let o = msi(&[
        "predict",
        "--model",
        path_str(&broken),
        "--data",
        path_str(&data),
        "--label",
        "label",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bench_writes_reproducible_reports() {
    let dir = TempDir::new().unwrap();
    let small = [
        "--std-start",
        "2.5",
        "--std-end",
        "3.0",
        "--std-step",
        "0.5",
        "--trials",
        "2",
        "--points-per-blob",
        "20",
    ];
    let run = |out: &Path, study: &str| {
        let mut args = vec!["bench", "--study", study, "--out", path_str(out)];
        args.extend_from_slice(&small);
        let o = msi(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run(&a, "blobs");
    run(&b, "blobs");
    let mut names: Vec<String> = std::fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "blobs_aggregate.csv",
            "blobs_manifest.txt",
            "blobs_trials.csv"
        ]
    );
    for n in &names {
        assert_eq!(
            std::fs::read(a.join(n)).unwrap(),
            std::fs::read(b.join(n)).unwrap(),
            "{n}"
        );
    }

    run(&a, "combiners");
    let agg = std::fs::read_to_string(a.join("combiners_aggregate.csv")).unwrap();
    assert_eq!(agg.lines().count(), 7);
}

#[test]
fn bench_csv_study_needs_data() {
    let dir = TempDir::new().unwrap();
    let o = msi(&["bench", "--study", "csv", "--out", path_str(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let data = dir.path().join("ep.csv");
    make_error_point_dataset(0).write_csv(&data).unwrap();
    let o = msi(&[
        "bench",
        "--study",
        "csv",
        "--data",
        path_str(&data),
        "--label",
        "label",
        "--repetitions",
        "1",
        "--out",
        path_str(dir.path()),
    ]);
    assert!(o.status.success());
    let agg = std::fs::read_to_string(dir.path().join("csv_aggregate.csv")).unwrap();
    assert_eq!(agg.lines().count(), 3);
}
