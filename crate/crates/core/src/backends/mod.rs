//! Adapters for the three model capabilities the pipeline depends on:
//! premise/claim classification, hypothesis decomposition and
//! contradiction generation.
//!
//! Every capability has a deterministic offline stub so the whole crate
//! runs without a model. Remote adapters speak JSON over HTTP.

mod prompt;
mod remote;
mod scripted;
mod stub;

use std::collections::HashSet;
use std::sync::Arc;

use rayon::prelude::*;

pub use prompt::{parse_generation, render_contradiction_prompt, CONTRADICTION_PROMPT_TEMPLATE};
pub use remote::{RemoteClassifier, RemoteDecomposer, RemoteGenerator};
pub use scripted::ScriptedClassifier;
pub use stub::{stub_classifier, stub_decomposer, stub_generator, StubClassifier, StubDecomposer, StubGenerator};

use crate::error::{Error, Result};
use crate::label::{Label, LabelDistribution};
use crate::types::{atom_key, validate_atoms, AtomicFact};

/// Scores a claim against a premise.
pub trait Classifier: Send + Sync {
    fn name(&self) -> &str;

    fn classify(&self, premise: &str, claim: &str) -> Result<LabelDistribution>;

    /// Must return one distribution per pair, in input order.
    fn classify_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<LabelDistribution>> {
        pairs.iter().map(|(p, c)| self.classify(p, c)).collect()
    }
}

/// Splits a hypothesis into atomic facts.
pub trait Decomposer: Send + Sync {
    fn name(&self) -> &str;

    fn decompose(&self, hypothesis: &str) -> Result<Vec<String>>;
}

/// A text-completion model used to write contradicting rewrites.
pub trait Generator: Send + Sync {
    fn name(&self) -> &str;

    /// Raw completion for a rendered prompt.
    fn complete(&self, prompt: &str) -> Result<String>;

    /// Render the contradiction prompt, complete it and extract the rewrite.
    /// Fails when the rewrite is empty or equal to the source atom.
    fn generate_contradiction(&self, premise: &str, atom: &str) -> Result<String> {
        let prompt = render_contradiction_prompt(premise, atom)?;
        let raw = self.complete(&prompt)?;
        let text = parse_generation(&raw)?;
        if atom_key(&text) == atom_key(atom) {
            return Err(Error::Backend(format!(
                "{}: generation repeats the source atom",
                self.name()
            )));
        }
        Ok(text)
    }
}

pub type SharedClassifier = Arc<dyn Classifier>;

const BATCH_CHUNK: usize = 64;

/// Classify many pairs, fanning chunks out over the current rayon pool.
/// Output order always matches input order.
pub fn classify_pairs(classifier: &dyn Classifier, pairs: &[(&str, &str)]) -> Result<Vec<LabelDistribution>> {
    if pairs.len() <= BATCH_CHUNK {
        return checked_batch(classifier, pairs);
    }
    let chunks: Vec<Result<Vec<LabelDistribution>>> = pairs
        .par_chunks(BATCH_CHUNK)
        .map(|chunk| checked_batch(classifier, chunk))
        .collect();
    let mut out = Vec::with_capacity(pairs.len());
    for chunk in chunks {
        out.extend(chunk?);
    }
    Ok(out)
}

fn checked_batch(classifier: &dyn Classifier, pairs: &[(&str, &str)]) -> Result<Vec<LabelDistribution>> {
    let out = classifier.classify_batch(pairs)?;
    if out.len() != pairs.len() {
        return Err(Error::Backend(format!(
            "{} returned {} distributions for {} pairs",
            classifier.name(),
            out.len(),
            pairs.len()
        )));
    }
    Ok(out)
}

/// Decompose a hypothesis and attach the atoms to `source_id`.
///
/// Blank fragments and repeats are dropped; the result must hold between
/// one and `max_atoms` atoms.
pub fn decompose_into(
    decomposer: &dyn Decomposer,
    source_id: &str,
    hypothesis: &str,
    max_atoms: usize,
) -> Result<Vec<AtomicFact>> {
    if hypothesis.trim().is_empty() {
        return Err(Error::InvalidInput("hypothesis is empty".into()));
    }
    atoms_from_texts(source_id, decomposer.decompose(hypothesis)?, max_atoms)
}

/// Trim, drop blanks and repeats, then check the decomposition is valid.
pub fn atoms_from_texts(source_id: &str, texts: Vec<String>, max_atoms: usize) -> Result<Vec<AtomicFact>> {
    let mut seen = HashSet::new();
    let texts: Vec<String> = texts
        .into_iter()
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty() && seen.insert(atom_key(t)))
        .collect();
    let facts = AtomicFact::from_texts(source_id, &texts)?;
    validate_atoms(&facts, max_atoms)?;
    Ok(facts)
}

/// A panel of classifiers that must agree before a generated pair is kept.
#[derive(Clone)]
pub struct Ensemble {
    members: Vec<SharedClassifier>,
}

impl Ensemble {
    pub fn new(members: Vec<SharedClassifier>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Config("ensemble needs at least one member".into()));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[SharedClassifier] {
        &self.members
    }
}

impl std::fmt::Debug for Ensemble {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list()
            .entries(self.members.iter().map(|m| m.name().to_string()))
            .finish()
    }
}

/// True iff every member predicts contradiction with `p_c > tau_c`.
pub fn ensemble_contradiction_check(
    ensemble: &Ensemble,
    premise: &str,
    candidate: &str,
    tau_c: f64,
) -> Result<bool> {
    for member in &ensemble.members {
        let d = member.classify(premise, candidate)?;
        if d.argmax() != Label::Contradiction || d.contradiction() <= tau_c {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixed(LabelDistribution);

    impl Classifier for Fixed {
        fn name(&self) -> &str {
            "fixed"
        }
        fn classify(&self, _: &str, _: &str) -> Result<LabelDistribution> {
            Ok(self.0)
        }
    }

    fn member(e: f64, n: f64, c: f64) -> SharedClassifier {
        Arc::new(Fixed(LabelDistribution::new(e, n, c).unwrap()))
    }

    #[test]
    fn ensemble_all_agree() {
        let e = Ensemble::new(vec![member(0.1, 0.1, 0.8), member(0.1, 0.1, 0.8)]).unwrap();
        assert!(ensemble_contradiction_check(&e, "p", "c", 0.5).unwrap());
    }

    #[test]
    fn ensemble_one_dissent() {
        let e = Ensemble::new(vec![member(0.1, 0.1, 0.8), member(0.2, 0.5, 0.3)]).unwrap();
        assert!(!ensemble_contradiction_check(&e, "p", "c", 0.5).unwrap());
    }

    #[test]
    fn ensemble_threshold_not_met() {
        let e = Ensemble::new(vec![member(0.1, 0.35, 0.55)]).unwrap();
        assert!(!ensemble_contradiction_check(&e, "p", "c", 0.6).unwrap());
    }

    #[test]
    fn ensemble_threshold_is_strict() {
        let e = Ensemble::new(vec![member(0.2, 0.3, 0.5)]).unwrap();
        assert!(!ensemble_contradiction_check(&e, "p", "c", 0.5).unwrap());
    }

    #[test]
    fn empty_ensemble_rejected() {
        assert!(Ensemble::new(vec![]).is_err());
    }

    #[test]
    fn removing_members_never_flips_true_to_false() {
        let all = vec![member(0.1, 0.1, 0.8), member(0.0, 0.3, 0.7), member(0.05, 0.05, 0.9)];
        let e = Ensemble::new(all.clone()).unwrap();
        assert!(ensemble_contradiction_check(&e, "p", "c", 0.6).unwrap());
        for skip in 0..all.len() {
            let rest: Vec<_> = all
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, m)| m.clone())
                .collect();
            let e = Ensemble::new(rest).unwrap();
            assert!(ensemble_contradiction_check(&e, "p", "c", 0.6).unwrap());
        }
    }

    #[test]
    fn batched_fanout_preserves_order() {
        let stub = stub_classifier();
        let texts: Vec<String> = (0..300)
            .map(|i| match i % 3 {
                0 => "a man runs".to_string(),
                1 => "no man runs".to_string(),
                _ => format!("a dog number {i} sleeps"),
            })
            .collect();
        let pairs: Vec<(&str, &str)> = texts.iter().map(|t| ("a man runs", t.as_str())).collect();
        let batched = classify_pairs(&stub, &pairs).unwrap();
        for (i, (p, c)) in pairs.iter().enumerate() {
            assert_eq!(batched[i], stub.classify(p, c).unwrap());
        }
    }

    #[test]
    fn decompose_into_dedups_and_bounds() {
        struct Echo;
        impl Decomposer for Echo {
            fn name(&self) -> &str {
                "echo"
            }
            fn decompose(&self, h: &str) -> Result<Vec<String>> {
                Ok(h.split('|').map(str::to_string).collect())
            }
        }
        let atoms = decompose_into(&Echo, "s1", "A man runs.| a man runs |  |A dog barks", 8).unwrap();
        let texts: Vec<_> = atoms.iter().map(|a| a.text.as_str()).collect();
        assert_eq!(texts, ["A man runs.", "A dog barks"]);
        assert_eq!(atoms[1].index, 1);
        assert!(decompose_into(&Echo, "s1", "a|b|c", 2).is_err());
        assert!(decompose_into(&Echo, "s1", "  ", 2).is_err());
    }
}
