//! Runs every cargo example and checks what it computes.

#[path = "../examples/explain_judgement.rs"]
mod explain_judgement;
#[path = "../examples/aggregation_modes.rs"]
mod aggregation_modes;
#[path = "../examples/decompose_hypotheses.rs"]
mod decompose_hypotheses;
#[path = "../examples/bm25_neutral_mining.rs"]
mod bm25_neutral_mining;
#[path = "../examples/contradiction_prompt.rs"]
mod contradiction_prompt;
#[path = "../examples/build_dataset.rs"]
mod build_dataset;
#[path = "../examples/stratified_report.rs"]
mod stratified_report;
#[path = "../examples/error_propagation.rs"]
mod error_propagation;

use atomic_nli::Label::{Contradiction, Entailment};

#[test]
fn explain_judgement_is_contradiction() {
    let mut out = Vec::new();
    assert_eq!(explain_judgement::run(&mut out).unwrap(), Contradiction);
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("atom ")).count(), 3);
}

#[test]
fn aggregation_modes_diverge() {
    let rows = aggregation_modes::run(&mut Vec::new()).unwrap();
    assert_eq!(
        rows,
        [(Contradiction, Entailment), (Contradiction, Entailment), (Entailment, Entailment)]
    );
}

#[test]
fn decompose_hypotheses_counts() {
    assert_eq!(decompose_hypotheses::run(&mut Vec::new()).unwrap(), [2, 2, 1, 3]);
}

#[test]
fn bm25_neutral_mining_keeps_other_instances() {
    let kept = bm25_neutral_mining::run(&mut Vec::new()).unwrap();
    let ids: Vec<&str> = kept.iter().map(|k| k.0.as_str()).collect();
    assert_eq!(ids, ["b#0", "b#1", "c#0"]);
}

#[test]
fn contradiction_prompt_validates_with_ensemble() {
    let mut out = Vec::new();
    let results = contradiction_prompt::run(&mut out).unwrap();
    assert_eq!(
        results,
        [
            ("No girl is swinging.".to_string(), true),
            ("No children are outside.".to_string(), false)
        ]
    );
    assert!(String::from_utf8(out).unwrap().contains("Original Atomic Fact: A girl is swinging."));
}

#[test]
fn build_dataset_writes_splits() {
    let dir = tempfile::tempdir().unwrap();
    let rows = build_dataset::run(&mut Vec::new(), dir.path()).unwrap();
    assert!(rows > 0 && rows <= 60);
    for f in ["train.jsonl", "train.stats.json", "test.jsonl", "test.stats.json"] {
        assert!(dir.path().join(f).is_file());
    }
}

#[test]
fn stratified_report_is_consistent() {
    let cmp = stratified_report::run(&mut Vec::new()).unwrap();
    assert_eq!(cmp.strict.overall.support, 30);
    let support: u64 = cmp.strict.strata.values().map(|s| s.support).sum();
    assert_eq!(support, 30);
}

#[test]
fn error_propagation_tracks_power_law() {
    for (n, measured, expected) in error_propagation::run(&mut Vec::new(), 4000).unwrap() {
        assert!((measured - expected).abs() < 0.04, "n={n}");
    }
}
