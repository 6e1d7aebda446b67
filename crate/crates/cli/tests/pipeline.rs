mod common;

use std::fs;

use sciq_cli::pipeline::{parse_scores, GraphSummary, Manifest};
use sciq_cli::{run, Layout, Stage, StageSelection};
use serde_json::Value;

use common::{config, mini, run_mini, snapshot};

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_mini(a.path());
    run_mini(b.path());
    let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
    let names = |s: &[(String, Vec<u8>)]| s.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>();
    assert_eq!(names(&sa), names(&sb));
    for ((name, x), (_, y)) in sa.iter().zip(&sb) {
        assert!(x == y, "{name} differs between runs");
    }

    // The manifest hashes every output it lists.
    let manifest: Manifest = serde_json::from_slice(&fs::read(Layout::new(a.path()).manifest()).unwrap()).unwrap();
    assert_eq!(manifest.stages.len(), Stage::ORDER.len());
    for record in manifest.stages.values() {
        for (rel, hash) in &record.outputs {
            let bytes = fs::read(a.path().join(rel)).unwrap();
            assert_eq!(&sciq_cli::pipeline::sha256_hex(&bytes), hash, "{rel}");
        }
    }

    let summary: GraphSummary =
        serde_json::from_slice(&fs::read(Layout::new(a.path()).graph_summary()).unwrap()).unwrap();
    let exp: Value = serde_json::from_str(&fs::read_to_string(mini().join("expected.json")).unwrap()).unwrap();
    assert_eq!(summary.built_nodes as u64, exp["built_nodes"].as_u64().unwrap());
    assert_eq!(summary.pruned_edges as u64, exp["pruned_edges"].as_u64().unwrap());
    assert_eq!(summary.merged_nodes as u64, exp["merged_nodes"].as_u64().unwrap());
    assert_eq!(summary.merged_edges as u64, exp["merged_edges"].as_u64().unwrap());

    let scores = parse_scores(&fs::read_to_string(Layout::new(a.path()).scores()).unwrap());
    assert!(!scores.is_empty());
    assert!(scores.values().all(|s| (1.0..=5.0).contains(s)));
}

#[test]
fn a_stage_without_its_inputs_names_what_is_missing() {
    let out = tempfile::tempdir().unwrap();
    let cfg = config(out.path(), None);
    let err = run(StageSelection::One(Stage::Graph), &cfg).unwrap_err();
    let msg = format!("{err:#}");
    assert!(msg.contains("graph") && msg.contains("ingest artifact"), "{msg}");
    assert!(!Layout::new(out.path()).graph_summary().exists());
}

#[test]
fn report_is_fatal_without_ratings() {
    let out = tempfile::tempdir().unwrap();
    let cfg = config(out.path(), Some(&out.path().join("absent.jsonl")));
    let err = run(StageSelection::One(Stage::Report), &cfg).unwrap_err();
    assert!(format!("{err:#}").contains("ratings"), "{err:#}");
    assert!(!Layout::new(out.path()).rmse_csv().exists());
}

#[test]
fn missing_input_fails_validation_before_any_stage() {
    let out = tempfile::tempdir().unwrap();
    let mut cfg = config(out.path(), None);
    cfg.inputs.embeddings = out.path().join("nope.txt");
    let err = run(StageSelection::One(Stage::Ingest), &cfg).unwrap_err();
    assert!(format!("{err:#}").contains("inputs.embeddings"), "{err:#}");
    assert!(!Layout::new(out.path()).manifest().exists());
}
