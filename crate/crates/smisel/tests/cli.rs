mod common;

use std::fs;

use common::*;
use serde_json::Value;
use smisel::report::{CompareReport, SelectionReport};
use smisel_core::EmbeddingKind;

fn fixture_args(objective: &str, budget: &str) -> Vec<String> {
    [
        "select", "--objective", objective, "--budget", budget, "--stable", "--sample-id", "fixture16",
        "--frames", path_str(&fixture("fixture16.frames.emb1")),
        "--queries", path_str(&fixture("fixture16.queries.emb1")),
    ]
    .map(String::from)
    .to_vec()
}

fn run_owned(args: &[String]) -> std::process::Output {
    smisel(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn select_golden_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.json");
    let mut args = fixture_args("flmi", "4");
    args.extend(["--output".into(), path_str(&out_path).into()]);
    let out = run_owned(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let golden = fs::read(fixture("fixture16.flmi_k4.report.json")).unwrap();
    assert_eq!(fs::read(&out_path).unwrap(), golden);
}

#[test]
fn golden_matches_brute_force_bound() {
    let report: SelectionReport =
        serde_json::from_slice(&fs::read(fixture("fixture16.flmi_k4.report.json")).unwrap()).unwrap();
    let frames = smisel::pipeline::load_embeddings(&fixture("fixture16.frames.emb1"), EmbeddingKind::Frames).unwrap();
    let queries = smisel::pipeline::load_embeddings(&fixture("fixture16.queries.emb1"), EmbeddingKind::Queries).unwrap();
    let kernel = smisel_core::build_kernel(&frames, &queries, smisel_core::KernelTransform::ClampZero).unwrap();
    let config = smisel_core::SmiConfig::new(smisel_core::Objective::Flmi);
    let (opt, _) = smisel_core::brute_force_select(&kernel, &config, smisel_core::Budget::new(4).unwrap()).unwrap();
    let value = report.objective_value.unwrap();
    assert!(value >= (1.0 - 1.0 / std::f64::consts::E) * opt - 1e-9);
    assert!(value <= opt + 1e-9);
    assert_eq!(report.gains.iter().sum::<f64>(), value);
}

#[test]
fn every_strategy_report_fits_schema() {
    for objective in ["flmi", "gcmi", "facility-location", "uniform", "random"] {
        let out = run_owned(&fixture_args(objective, "5"));
        assert!(out.status.success(), "{objective}: {}", stderr(&out));
        let value: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(schema_errors("selection_report.v1.json", &value), Vec::<String>::new(), "{objective}");
        let report: SelectionReport = serde_json::from_value(value).unwrap();
        assert_eq!(report.selected.len(), 5);
        let mut sorted = report.selected.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, report.selected_sorted);
    }
    let golden: Value = serde_json::from_slice(&fs::read(fixture("fixture16.flmi_k4.report.json")).unwrap()).unwrap();
    assert!(schema_errors("selection_report.v1.json", &golden).is_empty());
}

#[test]
fn schema_rejects_bad_reports() {
    let mut golden: Value =
        serde_json::from_slice(&fs::read(fixture("fixture16.flmi_k4.report.json")).unwrap()).unwrap();
    golden["objective"] = "dpp".into();
    assert!(!schema_errors("selection_report.v1.json", &golden).is_empty());
    golden["objective"] = "flmi".into();
    golden.as_object_mut().unwrap().remove("selected");
    assert!(!schema_errors("selection_report.v1.json", &golden).is_empty());
}

#[test]
fn compare_golden_and_schema() {
    let out = smisel(&[
        "compare", "--budget", "4", "--strategies", "uniform,random,gcmi,flmi,facility-location",
        "--seed", "7", "--stable", "--sample-id", "fixture16",
        "--frames", path_str(&fixture("fixture16.frames.emb1")),
        "--queries", path_str(&fixture("fixture16.queries.emb1")),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(out.stdout, fs::read(fixture("fixture16.compare_k4.json")).unwrap());
    let value: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(schema_errors("compare_report.v1.json", &value), Vec::<String>::new());
    let report: CompareReport = serde_json::from_value(value).unwrap();
    assert_eq!(report.overlaps.len(), 10);
    for (i, s) in report.strategies.iter().enumerate() {
        assert_eq!(s.timings.kernel_ms, None, "strategy {i}");
    }
}

#[test]
fn compare_identical_strategies_overlap_fully() {
    let out = smisel(&[
        "compare", "--budget", "6", "--strategies", "uniform,uniform",
        "--frames", path_str(&fixture("fixture16.frames.emb1")),
        "--queries", path_str(&fixture("fixture16.queries.emb1")),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: CompareReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.overlaps.len(), 1);
    assert_eq!(report.overlaps[0].overlap, 6);
    assert_eq!(report.overlaps[0].relevance_delta, 0.0);
    assert!(report.kernel_ms.is_some());
}

#[test]
fn gcmi_is_at_least_as_relevant_as_flmi_for_one_query() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("one");
    for seed in 0..10 {
        let seed = seed.to_string();
        let synth = smisel(&["synth", "--n", "40", "--d", "16", "--q", "1", "--seed", &seed, "--out-prefix", path_str(&prefix)]);
        assert!(synth.status.success(), "{}", stderr(&synth));
        let out = smisel(&[
            "compare", "--budget", "5", "--strategies", "gcmi,flmi",
            "--frames", path_str(&dir.path().join("one.frames.emb1")),
            "--queries", path_str(&dir.path().join("one.queries.emb1")),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        let report: CompareReport = serde_json::from_slice(&out.stdout).unwrap();
        assert!(report.strategies[0].query_relevance >= report.strategies[1].query_relevance, "seed {seed}");
        assert_eq!(report.relevance_ranking[0].rank, 1);
    }
}

#[test]
fn compare_needs_two_strategies() {
    let out = smisel(&[
        "compare", "--budget", "2", "--strategies", "flmi",
        "--frames", path_str(&fixture("fixture16.frames.emb1")),
        "--queries", path_str(&fixture("fixture16.queries.emb1")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("at least two"));
}

#[test]
fn orthogonal_fixture_cases() {
    let dir = tempfile::tempdir().unwrap();
    let (frames, queries) = write_orthogonal(dir.path());
    let select = |objective: &str, budget: &str| -> SelectionReport {
        let out = smisel(&[
            "select", "--objective", objective, "--budget", budget,
            "--frames", path_str(&frames), "--queries", path_str(&queries),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        serde_json::from_slice(&out.stdout).unwrap()
    };
    let gcmi = select("gcmi", "1");
    assert_eq!(gcmi.selected, vec![3]);
    assert_eq!(gcmi.sample_id, "ortho.frames");
    assert_eq!(select("uniform", "4").selected_sorted, vec![0, 2, 5, 7]);
    let flmi = select("flmi", "3");
    assert_eq!(flmi.selected[0], 3);
    assert_eq!(flmi.objective_value, Some(1.0));
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.emb1");
    let queries = fixture("fixture16.queries.emb1");
    let out = smisel(&["select", "--objective", "flmi", "--budget", "2", "--frames", path_str(&missing), "--queries", path_str(&queries)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("read-frames"), "{}", stderr(&out));

    let frames = fixture("fixture16.frames.emb1");
    let base = ["--frames", path_str(&frames), "--queries", path_str(&queries)];
    let out = smisel(&[&["select", "--objective", "flmi", "--budget", "0"][..], &base].concat());
    assert_eq!(out.status.code(), Some(1));

    let out = smisel(&[&["select", "--objective", "flmi", "--budget", "2", "--transform", "raw"][..], &base].concat());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("select"), "{}", stderr(&out));

    let out = smisel(&[&["select", "--objective", "gcmi", "--budget", "2", "--transform", "raw"][..], &base].concat());
    assert!(out.status.success(), "{}", stderr(&out));

    // dimension mismatch between frames and queries
    let (ortho_frames, _) = write_orthogonal(dir.path());
    let out = smisel(&["select", "--objective", "flmi", "--budget", "2", "--frames", path_str(&ortho_frames), "--queries", path_str(&queries)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("kernel"), "{}", stderr(&out));
}

#[test]
fn budget_larger_than_candidates() {
    let out = run_owned(&fixture_args("flmi", "40"));
    assert!(out.status.success(), "{}", stderr(&out));
    let report: SelectionReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.budget, 40);
    assert_eq!(report.selected_sorted, (0..16).collect::<Vec<_>>());
}

#[test]
fn verify_exit_codes() {
    let out = smisel(&["verify", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("warning"));

    let out = smisel(&["verify", "--trials", "12", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let lines: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(lines.len(), 9);
    assert!(lines.iter().all(|l| l.starts_with("PASS ")), "{lines:?}");
}

#[test]
fn kernel_dump() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("k");
    let mut args = fixture_args("flmi", "2");
    args.extend(["--dump-kernel".into(), path_str(&prefix).into()]);
    let out = run_owned(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let gg = smisel::emb1::read_emb1_file(&dir.path().join("k.gg.emb1"), EmbeddingKind::Frames).unwrap();
    let gq = smisel::emb1::read_emb1_file(&dir.path().join("k.gq.emb1"), EmbeddingKind::Frames).unwrap();
    assert_eq!((gg.count(), gg.dim(), gq.count(), gq.dim()), (16, 16, 16, 2));
    for i in 0..16 {
        assert!((gg.row(i)[i] - 1.0).abs() < 1e-6);
        for j in 0..16 {
            assert_eq!(gg.row(i)[j], gg.row(j)[i]);
            assert!(gg.row(i)[j] >= 0.0);
        }
    }
    let sidecar: Value = serde_json::from_slice(&fs::read(dir.path().join("k.kernel.json")).unwrap()).unwrap();
    assert_eq!(sidecar["transform"], "clamp_zero");
    assert_eq!(sidecar["ground_ground"], "k.gg.emb1");
}

#[test]
fn synth_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for p in [&a, &b] {
        assert!(smisel(&["synth", "--n", "16", "--d", "32", "--q", "2", "--seed", "7", "--out-prefix", path_str(p)]).status.success());
    }
    let read = |p: &std::path::Path| fs::read(p).unwrap();
    assert_eq!(read(&dir.path().join("a.frames.emb1")), read(&fixture("fixture16.frames.emb1")));
    assert_eq!(read(&dir.path().join("b.queries.emb1")), read(&fixture("fixture16.queries.emb1")));
}
