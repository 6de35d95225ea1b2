//! Render the minimal-edit prompt, generate a rewrite and validate it with
//! a two-member ensemble.
//!
//! `cargo run --example contradiction_prompt`

use std::io::Write;
use std::sync::Arc;

use atomic_nli::backends::{
    ensemble_contradiction_check, render_contradiction_prompt, stub_classifier, stub_generator, Ensemble, Generator,
    ScriptedClassifier,
};
use atomic_nli::LabelDistribution;

pub fn run(out: &mut dyn Write) -> atomic_nli::Result<Vec<(String, bool)>> {
    let premise = "A girl is swinging on a tire swing in a backyard.";
    let atoms = ["A girl is swinging.", "Some children are outside."];

    writeln!(out, "{}", render_contradiction_prompt(premise, atoms[0])?)?;
    writeln!(out, "---")?;

    let generator = stub_generator();
    let doubtful = ScriptedClassifier::new("doubtful")
        .with_claim("No children are outside.", LabelDistribution::new(0.2, 0.5, 0.3)?)
        .with_default(LabelDistribution::new(0.05, 0.05, 0.9)?);
    let ensemble = Ensemble::new(vec![Arc::new(stub_classifier()), Arc::new(doubtful)])?;

    let mut results = Vec::new();
    for atom in atoms {
        let rewrite = generator.generate_contradiction(premise, atom)?;
        let kept = ensemble_contradiction_check(&ensemble, premise, &rewrite, 0.5)?;
        writeln!(out, "{atom:<28} -> {rewrite:<32} {}", if kept { "kept" } else { "rejected" })?;
        results.push((rewrite, kept));
    }
    Ok(results)
}

#[allow(dead_code)]
fn main() -> atomic_nli::Result<()> {
    run(&mut std::io::stdout()).map(|_| ())
}
