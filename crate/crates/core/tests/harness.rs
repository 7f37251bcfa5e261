mod common;

use std::fs;

use climafact::harness::{
    cells_csv, compare_baselines, depth_curve_csv, run_cell, run_experiment, run_sweep,
    RetrieverConfig, DEFAULT_SWEEP,
};
use climafact::{GeneratorBackend, ServiceConfig};

use common::{experiment_fixture, generator_stub};

fn remote(url: &str) -> GeneratorBackend {
    GeneratorBackend::Remote(ServiceConfig {
        endpoint: url.to_string(),
        timeout_ms: 2_000,
        ..Default::default()
    })
}

#[test]
fn echo_cell_evaluates_every_claim_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let config = experiment_fixture(dir.path());
    let a = run_cell(&config).unwrap();
    assert_eq!((a.test_size, a.evaluated), (10, 10));
    assert!(a.failures.is_empty() && a.valid);
    assert_eq!(
        a.report.accuracy,
        Some(0.0),
        "echo output never parses as a label"
    );
    assert!(a.report.rouge1_f.unwrap() > 0.0);
    let b = run_cell(&config).unwrap();
    assert_eq!(cells_csv(&[a]).unwrap(), cells_csv(&[b]).unwrap());
}

#[test]
fn top1_cell_reports_no_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = experiment_fixture(dir.path());
    config.backend = GeneratorBackend::Top1;
    let cell = run_cell(&config).unwrap();
    assert_eq!(cell.evaluated, 10);
    assert_eq!(cell.report.accuracy, None);
    assert!(cell.report.rouge_l_f.is_some());
}

#[test]
fn unreachable_service_fails_every_record() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = experiment_fixture(dir.path());
    config.backend = remote("http://127.0.0.1:1");
    let cell = run_cell(&config).unwrap();
    assert_eq!(cell.evaluated, 0);
    assert_eq!(cell.failures.len(), 10);
    assert!(cell.failures.iter().all(|f| f.stage == "generation"));
    assert!(!cell.valid);
}

#[test]
fn sweep_gives_one_row_per_depth() {
    let dir = tempfile::tempdir().unwrap();
    let config = experiment_fixture(dir.path());
    let cells = run_sweep(&config, &DEFAULT_SWEEP).unwrap();
    let ks: Vec<usize> = cells.iter().map(|c| c.k).collect();
    assert_eq!(ks, DEFAULT_SWEEP);
    let curve = depth_curve_csv(&cells).unwrap();
    assert_eq!(curve.lines().count(), 6);
    assert!(curve.starts_with("k,acc,bscore_rs,rouge1,rougeL"));
}

#[test]
fn remote_sweep_uses_service_labels() {
    let server = generator_stub();
    let dir = tempfile::tempdir().unwrap();
    let mut config = experiment_fixture(dir.path());
    config.backend = remote(&server.url);
    let cell = run_cell(&config).unwrap();
    assert_eq!(cell.evaluated, 10);
    assert_eq!(
        cell.report.accuracy,
        Some(0.5),
        "fixture alternates SUPPORTS and REFUTES"
    );
}

#[test]
fn baselines_without_service_are_unavailable() {
    let dir = tempfile::tempdir().unwrap();
    let config = experiment_fixture(dir.path());
    let rows = compare_baselines(&config).unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r.name.as_str()).collect();
    assert_eq!(names, ["top1", "t5_only", "bert_veracity", "fid"]);
    assert!(rows[0].available);
    assert!(rows[1..].iter().all(|r| !r.available && r.cell.is_none()));
}

#[test]
fn baselines_with_service_are_populated() {
    let server = generator_stub();
    let dir = tempfile::tempdir().unwrap();
    let mut config = experiment_fixture(dir.path());
    config.backend = remote(&server.url);
    let rows = compare_baselines(&config).unwrap();
    assert!(rows.iter().all(|r| r.available));
    let veracity = rows[2].cell.as_ref().unwrap();
    assert_eq!(veracity.report.accuracy, Some(0.5));
    assert_eq!(veracity.report.rouge1_f, None);
    let claim_only = rows[1].cell.as_ref().unwrap();
    assert_eq!(claim_only.evaluated, 10);
}

#[test]
fn missing_artifacts_fail_before_generation() {
    let server = generator_stub();
    let dir = tempfile::tempdir().unwrap();
    let mut config = experiment_fixture(dir.path());
    config.backend = remote(&server.url);
    config.retriever = RetrieverConfig::Bm25 {
        index: dir.path().join("missing.idx"),
        params: Default::default(),
        entity_augment: false,
        linker: None,
    };
    let err = run_cell(&config).unwrap_err();
    assert!(err.to_string().contains("missing.idx"), "{err}");

    let mut config = experiment_fixture(dir.path());
    config.test_dataset = dir.path().join("split-{seed}.jsonl");
    config.seeds = vec![1, 2];
    fs::copy(
        dir.path().join("test.jsonl"),
        dir.path().join("split-1.jsonl"),
    )
    .unwrap();
    let err = run_cell(&config).unwrap_err();
    assert!(err.to_string().contains("split-2.jsonl"), "{err}");
    fs::copy(
        dir.path().join("test.jsonl"),
        dir.path().join("split-2.jsonl"),
    )
    .unwrap();
    let cell = run_cell(&config).unwrap();
    assert_eq!(cell.test_size, 20);
}

#[test]
fn experiment_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = experiment_fixture(dir.path());
    config.k_sweep = vec![1, 3];
    config.compare_baselines = true;
    let out = dir.path().join("out");
    let cells = run_experiment(&config, &out).unwrap();
    assert_eq!(cells.len(), 2);
    for f in [
        "cells.csv",
        "cells.json",
        "depth_curve.csv",
        "depth_curve.svg",
        "predictions.jsonl",
        "baselines.csv",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let preds = fs::read_to_string(out.join("predictions.jsonl")).unwrap();
    assert_eq!(preds.lines().count(), 20);
    let svg = fs::read_to_string(out.join("depth_curve.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn config_round_trips_through_json_with_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let config = experiment_fixture(dir.path());
    let mut json = serde_json::to_value(&config).unwrap();
    json["knowledge_source"] = "store.cfps".into();
    json["test_dataset"] = "test.jsonl".into();
    json["retriever"]["index"] = "bm25.idx".into();
    json.as_object_mut().unwrap().remove("name");
    let path = dir.path().join("echo_k1.json");
    fs::write(&path, json.to_string()).unwrap();
    let loaded = climafact::ExperimentConfig::load(&path).unwrap();
    assert_eq!(loaded.name, "echo_k1");
    assert_eq!(loaded.knowledge_source, dir.path().join("store.cfps"));
    loaded.validate().unwrap();
}
