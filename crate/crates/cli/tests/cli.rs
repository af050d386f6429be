//! End-to-end checks of the rlstat binary: round-trips, determinism and the
//! documented exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn rlstat(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rlstat"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn generate_fit_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let gen = rlstat(
        &["generate", "--generator", "clusters", "--seed", "3", "--out", "train.csv"],
        d,
    );
    assert!(gen.status.success(), "{gen:?}");
    let rows = std::fs::read_to_string(d.join("train.csv")).unwrap();
    assert_eq!(rows.lines().count(), 400);

    let fit = rlstat(
        &[
            "fit", "--data", "train.csv", "--label-column", "--algo", "rkm", "--k", "3",
            "--zeta", "0.75", "--restarts", "5", "--max-iters", "10", "--seed", "7",
            "--out", "model.json", "--trace", "trace.jsonl",
        ],
        d,
    );
    assert!(fit.status.success(), "{fit:?}");
    let summary: serde_json::Value = serde_json::from_str(&stdout(&fit)).unwrap();
    assert!(summary["final_objective"].as_f64().unwrap() >= 0.0);
    let trace = std::fs::read_to_string(d.join("trace.jsonl")).unwrap();
    assert_eq!(trace.lines().count(), 5);

    // determinism: identical flags give a byte-identical model
    let fit2 = rlstat(
        &[
            "fit", "--data", "train.csv", "--label-column", "--algo", "rkm", "--k", "3",
            "--zeta", "0.75", "--restarts", "5", "--max-iters", "10", "--seed", "7",
            "--out", "model2.json",
        ],
        d,
    );
    assert!(fit2.status.success());
    assert_eq!(
        std::fs::read(d.join("model.json")).unwrap(),
        std::fs::read(d.join("model2.json")).unwrap()
    );

    // in-process reproduction of the same pipeline
    let data = robust_lstat::data::gen_clusters_with_outliers(
        &robust_lstat::data::MixtureSpec::synthetic_clusters(),
        3,
    )
    .unwrap();
    let mut cfg = robust_lstat::solver::FitConfig::new(
        robust_lstat::solver::ModelKind::KMeans { k: 3 },
        robust_lstat::weights::WeightFunction::hard(0.75).unwrap(),
    );
    cfg.restarts = 5;
    cfg.max_iters = 10;
    cfg.seed = 7;
    let expected = robust_lstat::solver::fit(&data, &cfg).unwrap();
    let written: robust_lstat::models::Model =
        serde_json::from_str(&std::fs::read_to_string(d.join("model.json")).unwrap()).unwrap();
    assert_eq!(written, expected.model);

    let eval = rlstat(
        &["eval", "--data", "train.csv", "--label-column", "--model", "model.json"],
        d,
    );
    assert!(eval.status.success(), "{eval:?}");
    let metrics: serde_json::Value = serde_json::from_str(&stdout(&eval)).unwrap();
    let expected_err =
        robust_lstat::eval::reconstruction_error(&data, &expected.model).unwrap();
    assert_eq!(metrics["test_error"].as_f64().unwrap(), expected_err);
}

#[test]
fn eval_with_truth_reports_recovery() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    rlstat(
        &["generate", "--generator", "clusters", "--seed", "1", "--out", "train.csv"],
        d,
    );
    rlstat(
        &[
            "fit", "--data", "train.csv", "--label-column", "--algo", "rkm", "--k", "3",
            "--zeta", "0.75", "--restarts", "10", "--max-iters", "10", "--out", "model.json",
        ],
        d,
    );
    std::fs::write(
        d.join("truth.json"),
        r#"{"kind":"kmeans","centers":[[-3.0,0.0],[0.0,1.0],[3.0,0.0]]}"#,
    )
    .unwrap();
    let eval = rlstat(
        &[
            "eval", "--data", "train.csv", "--label-column", "--model", "model.json",
            "--truth", "truth.json",
        ],
        d,
    );
    assert!(eval.status.success(), "{eval:?}");
    let metrics: serde_json::Value = serde_json::from_str(&stdout(&eval)).unwrap();
    assert!(metrics["center_recovery"].as_f64().unwrap() < 0.5);
}

#[test]
fn sweep_emits_sorted_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("sweep.json"),
        r#"{
            "protocol": {"kind": "clusters"},
            "zetas": [0.75, 0.9],
            "algos": ["rkm", "kmeans"],
            "seeds": [1, 0],
            "k": 3,
            "max_iters": 5,
            "restarts": 2,
            "depth_pairs": 500
        }"#,
    )
    .unwrap();
    let sweep = rlstat(&["sweep", "--config", "sweep.json", "--out", "out.jsonl"], d);
    assert!(sweep.status.success(), "{sweep:?}");
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(d.join("out.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    // kmeans once per seed, rkm per (zeta, seed)
    assert_eq!(lines.len(), 2 + 4);
    let keys: Vec<(String, f64, u64)> = lines
        .iter()
        .map(|r| {
            (
                r["algo"].as_str().unwrap().to_string(),
                r["zeta"].as_f64().unwrap(),
                r["seed"].as_u64().unwrap(),
            )
        })
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    assert_eq!(keys, sorted);
}

#[test]
fn depth_and_oracle_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("tiny.csv"), "0\n1\n2\n").unwrap();
    let depth = rlstat(&["depth", "--data", "tiny.csv", "--zeta", "0.5"], d);
    assert!(depth.status.success(), "{depth:?}");
    let out: serde_json::Value = serde_json::from_str(&stdout(&depth)).unwrap();
    assert_eq!(out["scores"], serde_json::json!([2.0, 3.0, 2.0]));
    assert_eq!(out["retained"], serde_json::json!([0, 1]));

    std::fs::write(d.join("three.csv"), "0\n0.1\n10\n").unwrap();
    let oracle = rlstat(&["oracle", "--data", "three.csv", "--h", "2"], d);
    assert!(oracle.status.success(), "{oracle:?}");
    let out: serde_json::Value = serde_json::from_str(&stdout(&oracle)).unwrap();
    assert_eq!(out["subset"], serde_json::json!([0, 1]));
    assert!((out["cost"].as_f64().unwrap() - 0.005).abs() < 1e-12);

    std::fs::write(
        d.join("c6.json"),
        r#"{"adjacency": [
            [0,1,0,0,0,1],[1,0,1,0,0,0],[0,1,0,1,0,0],
            [0,0,1,0,1,0],[0,0,0,1,0,1],[1,0,0,0,1,0]]}"#,
    )
    .unwrap();
    let decide = rlstat(&["oracle", "--graph", "c6.json", "--decide"], d);
    assert!(decide.status.success(), "{decide:?}");
    let out: serde_json::Value = serde_json::from_str(&stdout(&decide)).unwrap();
    assert_eq!(out["clique"], serde_json::json!(false));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("tiny.csv"), "0\n1\n2\n").unwrap();

    // validation error -> 2
    let bad_zeta = rlstat(
        &[
            "fit", "--data", "tiny.csv", "--algo", "rkm", "--zeta", "1.5",
            "--out", "m.json",
        ],
        d,
    );
    assert_eq!(bad_zeta.status.code(), Some(2), "{bad_zeta:?}");
    let bad_algo = rlstat(
        &["fit", "--data", "tiny.csv", "--algo", "mystery", "--out", "m.json"],
        d,
    );
    assert_eq!(bad_algo.status.code(), Some(2));

    // I/O error -> 3
    let missing = rlstat(
        &["fit", "--data", "nope.csv", "--algo", "kmeans", "--out", "m.json"],
        d,
    );
    assert_eq!(missing.status.code(), Some(3), "{missing:?}");

    // guard violation -> 4
    let big: String = (0..30).map(|i| format!("{i}\n")).collect();
    std::fs::write(d.join("big.csv"), big).unwrap();
    let guard = rlstat(&["oracle", "--data", "big.csv", "--h", "5"], d);
    assert_eq!(guard.status.code(), Some(4), "{guard:?}");
    // guard override succeeds
    let ok = rlstat(
        &["oracle", "--data", "big.csv", "--h", "5", "--max-n", "30"],
        d,
    );
    assert_eq!(ok.status.code(), Some(0), "{ok:?}");

    // clap usage error -> 2
    let usage = rlstat(&["generate", "--generator", "clusters"], d);
    assert_eq!(usage.status.code(), Some(2));
}
