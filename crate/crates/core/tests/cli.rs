//! End-to-end checks of the `kmids` binary: exit codes, stderr wording, and
//! the files each subcommand leaves behind.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/fixture.csv")
}

fn write_config(dir: &Path, cluster_count: usize, extra: &str) -> PathBuf {
    let path = dir.join("config.json");
    let out = dir.join("out");
    std::fs::write(
        &path,
        format!(
            r#"{{
  "dataset": {:?},
  "cluster_count": {cluster_count},
  "labeling": {{ "mode": "unsupervised", "alpha": 0.06 }},
  "out_dir": {:?}{extra}
}}"#,
            fixture(),
            out
        ),
    )
    .unwrap();
    path
}

fn kmids(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kmids"))
        .args(args)
        .output()
        .unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_writes_all_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), 6, "");
    let out = kmids(&["--config", config.to_str().unwrap(), "run"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out_dir = tmp.path().join("out");
    for file in [
        "encoded.csv",
        "encoded.json",
        "standardization.json",
        "clustering.json",
        "verdicts.csv",
        "metrics.json",
        "metrics_plot.csv",
        "manifest.json",
    ] {
        assert!(out_dir.join(file).exists(), "missing {file}");
    }
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("DR"), "no metrics line in: {stdout}");
}

#[test]
fn staged_ingest_cluster_evaluate() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), 6, "");
    let c = config.to_str().unwrap();
    for args in [
        vec!["--config", c, "ingest"],
        vec!["--config", c, "cluster", "--method", "new-medoid"],
        vec!["--config", c, "evaluate"],
    ] {
        let out = kmids(&args);
        assert!(out.status.success(), "{args:?}: {}", stderr(&out));
    }
    assert!(tmp.path().join("out/metrics.json").exists());
}

#[test]
fn zero_clusters_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), 0, "");
    let out = kmids(&["--config", config.to_str().unwrap(), "run"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cluster count"), "{}", stderr(&out));
}

#[test]
fn missing_dataset_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("config.json");
    std::fs::write(
        &path,
        format!(
            r#"{{ "dataset": "/nonexistent/kdd.csv", "cluster_count": 3, "out_dir": {:?} }}"#,
            tmp.path().join("out")
        ),
    )
    .unwrap();
    let out = kmids(&["--config", path.to_str().unwrap(), "run"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("not found"), "{}", stderr(&out));
}

#[test]
fn missing_config_flag_is_a_config_error() {
    let out = kmids(&["run"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--config"), "{}", stderr(&out));
}

#[test]
fn seed_override_requires_a_sample_block() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), 6, "");
    let out = kmids(&["--config", config.to_str().unwrap(), "--seed", "9", "run"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("sample"), "{}", stderr(&out));
}

#[test]
fn seed_changes_the_sample() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        4,
        r#",
  "sample": { "strategy": "uniform", "count": 200, "seed": 1 }"#,
    );
    let c = config.to_str().unwrap();
    let out_dir = tmp.path().join("out");
    let first = kmids(&["--config", c, "--quiet", "ingest"]);
    assert!(first.status.success(), "{}", stderr(&first));
    let encoded_a = std::fs::read(out_dir.join("encoded.csv")).unwrap();
    let second = kmids(&["--config", c, "--seed", "2", "--quiet", "ingest"]);
    assert!(second.status.success(), "{}", stderr(&second));
    let encoded_b = std::fs::read(out_dir.join("encoded.csv")).unwrap();
    assert_ne!(encoded_a, encoded_b, "seed override had no effect");
}

#[test]
fn compare_runs_both_methods() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), 6, "");
    let out = kmids(&["--config", config.to_str().unwrap(), "compare"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("new-medoid") && stdout.contains("k-means"), "{stdout}");
    assert!(stdout.contains("reference"), "{stdout}");
    let out_dir = tmp.path().join("out");
    assert!(out_dir.join("comparison.json").exists());
    assert!(out_dir.join("comparison_plot.csv").exists());
}

#[test]
fn out_override_redirects_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), 6, "");
    let elsewhere = tmp.path().join("elsewhere");
    let out = kmids(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        elsewhere.to_str().unwrap(),
        "run",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(elsewhere.join("metrics.json").exists());
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn evaluate_without_clustering_fails_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), 6, "");
    let out = kmids(&["--config", config.to_str().unwrap(), "evaluate"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("cluster"), "{}", stderr(&out));
}
