//! Build atomic training triplets and the grouped test split from a small
//! SNLI-style file, entirely offline.
//!
//! `cargo run --example build_dataset -- [output dir]`

use std::io::Write;
use std::path::{Path, PathBuf};

use atomic_nli::backends::{stub_classifier, stub_decomposer, stub_generator, Ensemble};
use atomic_nli::construct::{
    assemble, atom_index, build_contradiction_pairs, build_entailment_pairs, build_neutral_pairs, build_test_split,
    decompose_instances, stats, GenerationBackends, SplitName,
};
use atomic_nli::io::{read_sentences, write_json, write_split};
use atomic_nli::{Label, PipelineConfig, SentenceInstance};

pub fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/snli_30.jsonl")
}

pub fn run(out: &mut dyn Write, dir: &Path) -> atomic_nli::Result<usize> {
    let cfg = PipelineConfig {
        seed: 42,
        per_class_cap: Some(20),
        ..PipelineConfig::default()
    };
    let classifier = stub_classifier();
    let decomposer = stub_decomposer();
    let generator = stub_generator();
    let ensemble = Ensemble::new(vec![std::sync::Arc::new(stub_classifier())])?;

    let sentences = read_sentences(&fixture())?;
    let decomposed = decompose_instances(&sentences, &decomposer, cfg.max_atoms)?;
    let instances = &decomposed.instances;
    let gold_e: Vec<SentenceInstance> = instances.iter().filter(|i| i.gold == Label::Entailment).cloned().collect();

    let entail = build_entailment_pairs(&gold_e, &classifier, &cfg)?;
    let index = atom_index(instances, &cfg)?;
    let neutral = build_neutral_pairs(instances, &classifier, Some(&index), &cfg)?;
    let generation = GenerationBackends {
        generator: &generator,
        ensemble: &ensemble,
    };
    let contra = build_contradiction_pairs(instances, &classifier, Some(generation), &cfg)?;
    writeln!(out, "before balancing: {} / {} / {}", entail.len(), neutral.len(), contra.len())?;

    let train = assemble(SplitName::Train, entail, neutral, contra, &cfg)?;
    let (test, dropped) = build_test_split(&sentences, &decomposer, cfg.max_atoms)?;
    std::fs::create_dir_all(dir)?;
    for split in [&train, &test] {
        let path = write_split(dir, split)?;
        let s = stats(split)?;
        write_json(&dir.join(format!("{}.stats.json", split.name)), &s)?;
        writeln!(out, "{} -> {}", split.name, path.display())?;
        for (label, c) in &s.classes {
            writeln!(
                out,
                "  {:<14} {:>4} rows  {:>3} premises  avg len {:>6.2}  premise use {:.2}",
                label.as_str(),
                c.instances,
                c.unique_premises,
                c.avg_length,
                c.premise_use
            )?;
        }
    }
    writeln!(out, "test instances dropped: {}", dropped.len())?;
    Ok(train.len())
}

#[allow(dead_code)]
fn main() -> atomic_nli::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("atomic-nli-example"));
    run(&mut std::io::stdout(), &dir).map(|_| ())
}
