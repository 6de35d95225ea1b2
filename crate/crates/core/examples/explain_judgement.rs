//! Explain a contradiction atom by atom (the blond-woman example).
//!
//! `cargo run --example explain_judgement`

use std::io::Write;

use atomic_nli::backends::ScriptedClassifier;
use atomic_nli::cli::render_verdict;
use atomic_nli::types::AtomicFact;
use atomic_nli::{judge, AggregationMode, Label, LabelDistribution};

pub fn run(out: &mut dyn Write) -> atomic_nli::Result<Label> {
    let premise = "A blond woman is looking at a camera that a brunette woman is holding \
                   in front of a wall with several pieces of art on it.";
    let atoms = [
        "A blond woman is holding a camera.",
        "A blond woman is looking at a wall.",
        "The wall has several pieces of sharks on it.",
    ];
    // replayed model outputs: one confident label per atom
    let classifier = ScriptedClassifier::new("replay")
        .with_claim(atoms[0], LabelDistribution::new(0.02, 0.08, 0.90)?)
        .with_claim(atoms[1], LabelDistribution::new(0.93, 0.05, 0.02)?)
        .with_claim(atoms[2], LabelDistribution::new(0.10, 0.85, 0.05)?);
    let facts = AtomicFact::from_texts("blond", &atoms)?;

    let verdict = judge(premise, &facts, &classifier, AggregationMode::Strict)?;
    write!(out, "{}", render_verdict(&verdict))?;
    writeln!(out, "{}", serde_json::to_string_pretty(&verdict.to_record())?)?;
    Ok(verdict.aggregated)
}

#[allow(dead_code)]
fn main() -> atomic_nli::Result<()> {
    run(&mut std::io::stdout()).map(|_| ())
}
