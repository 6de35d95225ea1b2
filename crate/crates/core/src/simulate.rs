//! Error propagation under strict aggregation.
//!
//! With a classifier that gets each atom right independently with
//! probability `q`, an all-entailment hypothesis of `n` atoms is only
//! recovered when every atom is right, so strict-mode entailment recall
//! tends to `q^n`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::backends::ScriptedClassifier;
use crate::error::{Error, Result};
use crate::evaluate::{stratified_eval, EvalMode, EvalOptions};
use crate::label::{Label, LabelDistribution};
use crate::types::SentenceInstance;

/// Synthetic test set plus a classifier that is right on each atom with
/// probability `q`; wrong answers are uniform over the other two labels.
pub fn noisy_entailment_fixture(
    q: f64,
    atoms_per_instance: usize,
    samples: usize,
    seed: u64,
) -> Result<(Vec<SentenceInstance>, ScriptedClassifier)> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidInput(format!("accuracy {q} outside [0, 1]")));
    }
    if atoms_per_instance == 0 || samples == 0 {
        return Err(Error::InvalidInput("need at least one atom and one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classifier = ScriptedClassifier::new(format!("noisy-q{q}"));
    let mut test = Vec::with_capacity(samples);
    for s in 0..samples {
        let texts: Vec<String> = (0..atoms_per_instance).map(|a| format!("fact {s} {a}")).collect();
        for t in &texts {
            let label = if rng.gen_bool(q) {
                Label::Entailment
            } else if rng.gen_bool(0.5) {
                Label::Neutral
            } else {
                Label::Contradiction
            };
            classifier = classifier.with_claim(t, LabelDistribution::one_hot(label));
        }
        let inst = SentenceInstance::undecomposed(format!("sim-{s}"), "premise", texts.join(" and "), Label::Entailment)
            .with_atoms(&texts, atoms_per_instance)?;
        test.push(inst);
    }
    Ok((test, classifier))
}

/// Measured strict-mode entailment recall on `samples` all-entailment
/// instances of `atoms_per_instance` atoms.
pub fn strict_entailment_recall(q: f64, atoms_per_instance: usize, samples: usize, seed: u64) -> Result<f64> {
    let (test, classifier) = noisy_entailment_fixture(q, atoms_per_instance, samples, seed)?;
    let opts = EvalOptions {
        max_stratum: atoms_per_instance.max(1),
    };
    let report = stratified_eval(&test, &classifier, EvalMode::Strict, &opts)?;
    Ok(report.overall.classes[&Label::Entailment].recall)
}
