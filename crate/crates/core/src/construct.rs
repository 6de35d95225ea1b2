//! Label-specific construction of atomic `(premise, atom, label)` triplets
//! and the grouped test split.
//!
//! * entailment: atoms of gold-entailment instances with `p_e > tau_e`
//! * neutral: existing pairs with `p_n > tau_n`, plus BM25-retrieved atoms
//!   from other instances that the classifier re-ranks as neutral
//! * contradiction: existing pairs with `p_c > tau_c`, plus LLM rewrites of
//!   entailed atoms that every ensemble member calls a contradiction
//!
//! Every threshold comparison is strict.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backends::{atoms_from_texts, classify_pairs, ensemble_contradiction_check, Classifier, Decomposer, Ensemble, Generator};
use crate::error::{Error, Result};
use crate::label::{Label, LabelDistribution};
use crate::retrieval::{rerank_by_neutrality, Bm25Index};
use crate::types::{AtomicInstance, PipelineConfig, Provenance, SentenceInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Validation,
    Test,
}

impl std::fmt::Display for SplitName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SplitName::Train => "train",
            SplitName::Validation => "validation",
            SplitName::Test => "test",
        })
    }
}

/// Train and validation splits carry triplets; the test split keeps
/// sentence-level instances with their atoms.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitData {
    Atomic(Vec<AtomicInstance>),
    Grouped(Vec<SentenceInstance>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub name: SplitName,
    pub data: SplitData,
}

impl DatasetSplit {
    pub fn atomic(name: SplitName, rows: Vec<AtomicInstance>) -> Result<Self> {
        if name == SplitName::Test {
            return Err(Error::InvalidInput("the test split holds grouped instances".into()));
        }
        Ok(Self {
            name,
            data: SplitData::Atomic(rows),
        })
    }

    pub fn grouped(rows: Vec<SentenceInstance>) -> Self {
        Self {
            name: SplitName::Test,
            data: SplitData::Grouped(rows),
        }
    }

    pub fn len(&self) -> usize {
        match &self.data {
            SplitData::Atomic(r) => r.len(),
            SplitData::Grouped(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn atomic_rows(&self) -> Option<&[AtomicInstance]> {
        match &self.data {
            SplitData::Atomic(r) => Some(r),
            SplitData::Grouped(_) => None,
        }
    }

    pub fn grouped_rows(&self) -> Option<&[SentenceInstance]> {
        match &self.data {
            SplitData::Grouped(r) => Some(r),
            SplitData::Atomic(_) => None,
        }
    }
}

/// Classify every atom of every instance. Instances are scored in
/// parallel; the first failing instance (in input order) is reported.
pub fn score_atoms(
    instances: &[SentenceInstance],
    classifier: &dyn Classifier,
) -> Result<Vec<Vec<LabelDistribution>>> {
    let results: Vec<Result<Vec<LabelDistribution>>> = instances
        .par_iter()
        .map(|inst| {
            let pairs: Vec<(&str, &str)> = inst
                .atoms
                .iter()
                .map(|a| (inst.premise.as_str(), a.text.as_str()))
                .collect();
            classify_pairs(classifier, &pairs).map_err(|e| e.in_instance(&inst.id))
        })
        .collect();
    results.into_iter().collect()
}

fn dedup(rows: Vec<AtomicInstance>) -> Vec<AtomicInstance> {
    let mut seen = HashSet::new();
    rows.into_iter().filter(|r| seen.insert(r.dedup_key())).collect()
}

fn require_atoms(inst: &SentenceInstance) -> Result<()> {
    if inst.atoms.is_empty() {
        return Err(Error::InvalidInput(format!("instance '{}' has not been decomposed", inst.id)));
    }
    Ok(())
}

/// Pairs from scored instances whose `label` probability exceeds `tau`.
fn direct_pairs(
    instances: &[SentenceInstance],
    scores: &[Vec<LabelDistribution>],
    label: Label,
    tau: f64,
    provenance: Provenance,
    gold_filter: Option<Label>,
) -> Vec<AtomicInstance> {
    let mut out = Vec::new();
    for (inst, dists) in instances.iter().zip(scores) {
        if gold_filter.is_some_and(|g| g != inst.gold) {
            continue;
        }
        for (atom, d) in inst.atoms.iter().zip(dists) {
            if d.get(label) > tau {
                out.push(AtomicInstance::new(atom.doc_id(), &inst.premise, &atom.text, provenance));
            }
        }
    }
    out
}

pub fn build_entailment_pairs(
    instances: &[SentenceInstance],
    classifier: &dyn Classifier,
    cfg: &PipelineConfig,
) -> Result<Vec<AtomicInstance>> {
    for inst in instances {
        if inst.gold != Label::Entailment {
            return Err(Error::InvalidInput(format!(
                "instance '{}' is {}, entailment pairs need gold entailment",
                inst.id, inst.gold
            )));
        }
        require_atoms(inst)?;
    }
    let scores = score_atoms(instances, classifier)?;
    Ok(dedup(direct_pairs(
        instances,
        &scores,
        Label::Entailment,
        cfg.tau_e,
        Provenance::DirectEntailment,
        None,
    )))
}

/// Neutral pairs from the direct branch followed by the retrieval branch,
/// deduplicated with the direct branch winning.
///
/// `index` must hold the atoms of `instances` keyed by
/// [`AtomicFact::doc_id`](crate::types::AtomicFact::doc_id); documents that
/// belong to an instance sharing the query premise are never used. Pass
/// `None` to disable retrieval.
pub fn build_neutral_pairs(
    instances: &[SentenceInstance],
    classifier: &dyn Classifier,
    index: Option<&Bm25Index>,
    cfg: &PipelineConfig,
) -> Result<Vec<AtomicInstance>> {
    instances.iter().try_for_each(require_atoms)?;
    let scores = score_atoms(instances, classifier)?;
    let gold_filter = cfg.direct_matching_gold_only.then_some(Label::Neutral);
    let mut rows = direct_pairs(instances, &scores, Label::Neutral, cfg.tau_n, Provenance::DirectNeutral, gold_filter);
    if let Some(index) = index {
        rows.extend(retrieve_neutral(instances, classifier, index, cfg)?);
    }
    Ok(dedup(rows))
}

/// BM25 index over every atom of `instances`, keyed by doc id.
pub fn atom_index(instances: &[SentenceInstance], cfg: &PipelineConfig) -> Result<Bm25Index> {
    Bm25Index::build(
        instances
            .iter()
            .flat_map(|i| i.atoms.iter().map(|a| (a.doc_id(), a.text.clone()))),
        cfg.bm25_k1,
        cfg.bm25_b,
    )
}

fn retrieve_neutral(
    instances: &[SentenceInstance],
    classifier: &dyn Classifier,
    index: &Bm25Index,
    cfg: &PipelineConfig,
) -> Result<Vec<AtomicInstance>> {
    let doc_source: HashMap<String, &str> = instances
        .iter()
        .flat_map(|i| i.atoms.iter().map(|a| (a.doc_id(), a.source_id.as_str())))
        .collect();

    // premises in first-appearance order, with every instance id that uses them
    let mut order: Vec<&str> = Vec::new();
    let mut owners: HashMap<&str, (String, HashSet<&str>)> = HashMap::new();
    for inst in instances {
        owners
            .entry(inst.premise.as_str())
            .or_insert_with(|| {
                order.push(inst.premise.as_str());
                (inst.id.clone(), HashSet::new())
            })
            .1
            .insert(inst.id.as_str());
    }

    let per_premise: Vec<Result<Vec<AtomicInstance>>> = order
        .par_iter()
        .map(|premise| {
            let (first_id, own) = &owners[premise];
            let candidates: Vec<(String, String)> = index
                .query_docs(premise, cfg.retrieval_k)
                .into_iter()
                .filter(|(doc, _)| doc_source.get(&doc.id).is_none_or(|src| !own.contains(src)))
                .map(|(doc, _)| (doc.id.clone(), doc.text.clone()))
                .collect();
            let text_of: HashMap<&str, &str> = candidates.iter().map(|(id, t)| (id.as_str(), t.as_str())).collect();
            let kept = rerank_by_neutrality(premise, &candidates, classifier, cfg.tau_n)
                .map_err(|e| e.in_instance(first_id))?;
            Ok(kept
                .into_iter()
                .map(|(doc_id, _)| {
                    AtomicInstance::new(
                        format!("{first_id}~{doc_id}"),
                        *premise,
                        text_of[doc_id.as_str()],
                        Provenance::RetrievedNeutral,
                    )
                })
                .collect())
        })
        .collect();
    let mut out = Vec::new();
    for r in per_premise {
        out.extend(r?);
    }
    Ok(out)
}

/// Generation-branch backends.
#[derive(Clone, Copy)]
pub struct GenerationBackends<'a> {
    pub generator: &'a dyn Generator,
    pub ensemble: &'a Ensemble,
}

/// Contradiction pairs from the direct branch followed by validated
/// rewrites. Pass `None` to disable generation.
///
/// A rewrite that fails to generate, fails to parse or repeats its source
/// atom is logged and skipped. Classifier errors abort.
pub fn build_contradiction_pairs(
    instances: &[SentenceInstance],
    classifier: &dyn Classifier,
    generation: Option<GenerationBackends<'_>>,
    cfg: &PipelineConfig,
) -> Result<Vec<AtomicInstance>> {
    instances.iter().try_for_each(require_atoms)?;
    let scores = score_atoms(instances, classifier)?;
    let gold_filter = cfg.direct_matching_gold_only.then_some(Label::Contradiction);
    let mut rows = direct_pairs(
        instances,
        &scores,
        Label::Contradiction,
        cfg.tau_c,
        Provenance::DirectContradiction,
        gold_filter,
    );

    if let Some(backends) = generation {
        let seeds: Vec<(&SentenceInstance, usize)> = instances
            .iter()
            .zip(&scores)
            .flat_map(|(inst, dists)| {
                dists
                    .iter()
                    .enumerate()
                    .filter(|(_, d)| d.entailment() > cfg.tau_e)
                    .map(move |(i, _)| (inst, i))
            })
            .collect();
        let generated: Vec<Result<Option<AtomicInstance>>> = seeds
            .par_iter()
            .map(|&(inst, i)| {
                let atom = &inst.atoms[i];
                let rewrite = match backends.generator.generate_contradiction(&inst.premise, &atom.text) {
                    Ok(t) => t,
                    Err(e) => {
                        log::warn!("skipping generation for {}: {e}", atom.doc_id());
                        return Ok(None);
                    }
                };
                let keep = ensemble_contradiction_check(backends.ensemble, &inst.premise, &rewrite, cfg.tau_c)
                    .map_err(|e| e.in_instance(&inst.id))?;
                Ok(keep.then(|| {
                    AtomicInstance::new(
                        format!("{}/gen", atom.doc_id()),
                        &inst.premise,
                        rewrite,
                        Provenance::GeneratedContradiction,
                    )
                }))
            })
            .collect();
        for g in generated {
            rows.extend(g?);
        }
    }
    Ok(dedup(rows))
}

/// Optionally cap each class by seeded uniform sampling, then merge and
/// sort by `(premise, atom)`.
pub fn assemble(
    name: SplitName,
    entail: Vec<AtomicInstance>,
    neutral: Vec<AtomicInstance>,
    contra: Vec<AtomicInstance>,
    cfg: &PipelineConfig,
) -> Result<DatasetSplit> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::with_capacity(entail.len() + neutral.len() + contra.len());
    for class in [entail, neutral, contra] {
        match cfg.per_class_cap {
            Some(cap) if cap < class.len() => {
                let mut picked = sample(&mut rng, class.len(), cap).into_vec();
                picked.sort_unstable();
                rows.extend(picked.into_iter().map(|i| class[i].clone()));
            }
            _ => rows.extend(class),
        }
    }
    rows.sort_by(|a, b| {
        (&a.premise, &a.atom, a.label, a.provenance, &a.id).cmp(&(&b.premise, &b.atom, b.label, b.provenance, &b.id))
    });
    DatasetSplit::atomic(name, rows)
}

/// Outcome of decomposing a batch of instances.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposed {
    pub instances: Vec<SentenceInstance>,
    /// Ids of instances whose decomposition was invalid.
    pub dropped: Vec<String>,
}

/// Decompose every hypothesis. Invalid decompositions (no atoms, too many
/// atoms) are dropped and recorded; decomposer failures abort with the
/// instance id.
pub fn decompose_instances(
    instances: &[SentenceInstance],
    decomposer: &dyn Decomposer,
    max_atoms: usize,
) -> Result<Decomposed> {
    let results: Vec<Result<Option<SentenceInstance>>> = instances
        .par_iter()
        .map(|inst| {
            if inst.hypothesis.trim().is_empty() {
                return Err(Error::InvalidInput("hypothesis is empty".into()).in_instance(&inst.id));
            }
            let texts = decomposer.decompose(&inst.hypothesis).map_err(|e| e.in_instance(&inst.id))?;
            Ok(atoms_from_texts(&inst.id, texts, max_atoms).ok().map(|atoms| SentenceInstance {
                atoms,
                ..inst.clone()
            }))
        })
        .collect();
    let mut out = Decomposed {
        instances: Vec::with_capacity(instances.len()),
        dropped: Vec::new(),
    };
    for (inst, r) in instances.iter().zip(results) {
        match r? {
            Some(done) => out.instances.push(done),
            None => out.dropped.push(inst.id.clone()),
        }
    }
    Ok(out)
}

/// Decompose instances into the grouped test split; gold labels are kept.
pub fn build_test_split(
    instances: &[SentenceInstance],
    decomposer: &dyn Decomposer,
    max_atoms: usize,
) -> Result<(DatasetSplit, Vec<String>)> {
    let d = decompose_instances(instances, decomposer, max_atoms)?;
    Ok((DatasetSplit::grouped(d.instances), d.dropped))
}

/// One row of a statistics table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub instances: usize,
    pub unique_premises: usize,
    /// Mean character count of the atom (or hypothesis) text, 2 decimals.
    pub avg_length: f64,
    /// Instances per unique premise, 2 decimals.
    pub premise_use: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub split: SplitName,
    pub classes: BTreeMap<Label, ClassStats>,
    pub total: ClassStats,
    /// Instances per atom count; test split only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub atom_histogram: Option<BTreeMap<usize, usize>>,
}

pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn class_stats<'a>(rows: impl Iterator<Item = (&'a str, &'a str)>) -> ClassStats {
    let mut premises = HashSet::new();
    let mut n = 0usize;
    let mut chars = 0usize;
    for (premise, text) in rows {
        premises.insert(premise);
        n += 1;
        chars += text.chars().count();
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { round2(num as f64 / den as f64) };
    ClassStats {
        instances: n,
        unique_premises: premises.len(),
        avg_length: ratio(chars, n),
        premise_use: ratio(n, premises.len()),
    }
}

pub fn stats(split: &DatasetSplit) -> Result<SplitStats> {
    if split.is_empty() {
        return Err(Error::EmptySplit);
    }
    let rows: Vec<(Label, &str, &str)> = match &split.data {
        SplitData::Atomic(r) => r.iter().map(|a| (a.label, a.premise.as_str(), a.atom.as_str())).collect(),
        SplitData::Grouped(r) => r
            .iter()
            .map(|s| (s.gold, s.premise.as_str(), s.hypothesis.as_str()))
            .collect(),
    };
    let classes = Label::ALL
        .into_iter()
        .map(|l| {
            let it = rows.iter().filter(move |r| r.0 == l).map(|r| (r.1, r.2));
            (l, class_stats(it))
        })
        .collect();
    let total = class_stats(rows.iter().map(|r| (r.1, r.2)));
    let atom_histogram = split.grouped_rows().map(atom_histogram);
    Ok(SplitStats {
        split: split.name,
        classes,
        total,
        atom_histogram,
    })
}

/// Number of instances per atom count.
pub fn atom_histogram(instances: &[SentenceInstance]) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for inst in instances {
        *h.entry(inst.atoms.len()).or_insert(0) += 1;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{stub_classifier, stub_decomposer, stub_generator, ScriptedClassifier, SharedClassifier};
    use std::sync::Arc;

    fn inst(id: &str, premise: &str, hyp: &str, gold: Label, atoms: &[&str]) -> SentenceInstance {
        SentenceInstance::undecomposed(id, premise, hyp, gold).with_atoms(atoms, 8).unwrap()
    }

    const SWING_PREMISE: &str =
        "A girl is swinging, rather high, on a swing with blue ropes with lots of trees in the background.";

    fn swing() -> SentenceInstance {
        inst(
            "swing",
            SWING_PREMISE,
            "A girl is swinging, rather high, on a swing with blue ropes.",
            Label::Entailment,
            &["A girl is swinging.", "The girl is rather high.", "The girl is on a swing with blue ropes."],
        )
    }

    #[test]
    fn entailed_atoms_all_kept() {
        let out = build_entailment_pairs(&[swing()], &stub_classifier(), &PipelineConfig::default()).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|r| r.provenance == Provenance::DirectEntailment && r.is_consistent()));
    }

    #[test]
    fn entailment_threshold_is_strict() {
        let cls = ScriptedClassifier::new("s").with_default(LabelDistribution::new(0.4, 0.5, 0.1).unwrap());
        let out = build_entailment_pairs(&[swing()], &cls, &PipelineConfig::default()).unwrap();
        assert!(out.is_empty());
        let at_threshold = ScriptedClassifier::new("s").with_default(LabelDistribution::new(0.5, 0.5, 0.0).unwrap());
        assert!(build_entailment_pairs(&[swing()], &at_threshold, &PipelineConfig::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn entailment_rejects_other_gold() {
        let mut i = swing();
        i.gold = Label::Neutral;
        assert!(build_entailment_pairs(&[i], &stub_classifier(), &PipelineConfig::default()).is_err());
        assert!(build_entailment_pairs(&[], &stub_classifier(), &PipelineConfig::default())
            .unwrap()
            .is_empty());
    }

    fn index_of(instances: &[SentenceInstance]) -> Bm25Index {
        Bm25Index::build(
            instances.iter().flat_map(|i| i.atoms.iter().map(|a| (a.doc_id(), a.text.clone()))),
            1.2,
            0.75,
        )
        .unwrap()
    }

    #[test]
    fn swim_meet_atom_is_direct_neutral() {
        let swim = inst(
            "swim",
            "A group of swimmers jump into a pool.",
            "A group of swimmers jump into a pool during a swim meet.",
            Label::Neutral,
            &["A group of swimmers jump into a pool.", "The jump occurs during a swim meet."],
        );
        let all = [swim];
        let out = build_neutral_pairs(&all, &stub_classifier(), Some(&index_of(&all)), &PipelineConfig::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].atom, "The jump occurs during a swim meet.");
        assert_eq!(out[0].provenance, Provenance::DirectNeutral);
    }

    #[test]
    fn retrieval_skips_same_source_and_dedups() {
        // "a man runs" premise; its own atom is lexically closest but must not
        // be retrieved for it. Both instances share the premise text of a third.
        let a = inst("a", "a man runs in a park", "h", Label::Entailment, &["a man runs in a park"]);
        let b = inst("b", "a dog sleeps", "h", Label::Neutral, &["a dog sleeps", "a man plays"]);
        let all = [a, b];
        let idx = index_of(&all);
        let out = build_neutral_pairs(&all, &stub_classifier(), Some(&idx), &PipelineConfig::default()).unwrap();
        for r in &out {
            if r.provenance == Provenance::RetrievedNeutral {
                let src = r.id.split('~').nth(1).unwrap().split('#').next().unwrap();
                let premise_owner = if r.premise == "a man runs in a park" { "a" } else { "b" };
                assert_ne!(src, premise_owner);
            }
        }
        // "a man plays" is direct-neutral for premise b; nothing else duplicates
        let keys: HashSet<_> = out.iter().map(|r| r.dedup_key()).collect();
        assert_eq!(keys.len(), out.len());
        assert!(out.iter().any(|r| r.premise == "a man runs in a park" && r.atom == "a dog sleeps"));
    }

    #[test]
    fn direct_wins_over_retrieved_on_duplicates() {
        // "a dog barks" is direct-neutral for "a cat naps" and the identical
        // atom of instance c is also retrieved for that premise
        let a = inst("a", "a cat naps", "h", Label::Neutral, &["a dog barks"]);
        let c = inst("c", "a bird sings", "h", Label::Neutral, &["a dog barks"]);
        let all = [a, c];
        let out = build_neutral_pairs(&all, &stub_classifier(), Some(&index_of(&all)), &PipelineConfig::default()).unwrap();
        let keys: HashSet<_> = out.iter().map(|r| r.dedup_key()).collect();
        assert_eq!(keys.len(), out.len());
        let hit: Vec<_> = out
            .iter()
            .filter(|r| r.premise == "a cat naps" && r.atom == "a dog barks")
            .collect();
        assert_eq!(hit.len(), 1);
        assert_eq!(hit[0].provenance, Provenance::DirectNeutral);
        assert_eq!(hit[0].id, "a#0");
    }

    fn courtyard() -> SentenceInstance {
        inst(
            "court",
            "A group of men are sitting and standing a courtyard, some of them are reading books and some are talking.",
            "Men are throwing books and talking outside in a courtyard.",
            Label::Contradiction,
            &["Men are throwing books.", "Men are talking outside.", "Men are in a courtyard."],
        )
    }

    #[test]
    fn direct_contradiction_kept() {
        let cls = ScriptedClassifier::new("s")
            .with_claim("Men are throwing books.", LabelDistribution::new(0.05, 0.15, 0.80).unwrap())
            .with_default(LabelDistribution::new(0.8, 0.15, 0.05).unwrap());
        let out = build_contradiction_pairs(&[courtyard()], &cls, None, &PipelineConfig::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].atom, "Men are throwing books.");
        assert_eq!(out[0].provenance, Provenance::DirectContradiction);
    }

    #[test]
    fn generated_rewrite_needs_every_member() {
        let base = ScriptedClassifier::new("base").with_default(LabelDistribution::new(0.8, 0.15, 0.05).unwrap());
        let yes: SharedClassifier = Arc::new(
            ScriptedClassifier::new("yes").with_default(LabelDistribution::new(0.05, 0.15, 0.8).unwrap()),
        );
        let no: SharedClassifier = Arc::new(
            ScriptedClassifier::new("no").with_default(LabelDistribution::new(0.2, 0.5, 0.3).unwrap()),
        );
        let gen = stub_generator();
        let cfg = PipelineConfig::default();

        let agree = Ensemble::new(vec![yes.clone(), yes.clone()]).unwrap();
        let out = build_contradiction_pairs(
            &[courtyard()],
            &base,
            Some(GenerationBackends {
                generator: &gen,
                ensemble: &agree,
            }),
            &cfg,
        )
        .unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|r| r.provenance == Provenance::GeneratedContradiction));
        assert_eq!(out[0].atom, "Men are not throwing books.");

        let split = Ensemble::new(vec![yes, no]).unwrap();
        let out = build_contradiction_pairs(
            &[courtyard()],
            &base,
            Some(GenerationBackends {
                generator: &gen,
                ensemble: &split,
            }),
            &cfg,
        )
        .unwrap();
        assert!(out.is_empty());
    }

    struct Parrot;
    impl Generator for Parrot {
        fn name(&self) -> &str {
            "parrot"
        }
        fn complete(&self, prompt: &str) -> Result<String> {
            let atom = prompt.lines().rev().find_map(|l| l.strip_prefix("Original Atomic Fact:")).unwrap();
            Ok(format!("Contradiction: {}", atom.trim()))
        }
    }

    #[test]
    fn rewrite_equal_to_source_is_dropped() {
        let base = ScriptedClassifier::new("base").with_default(LabelDistribution::new(0.8, 0.15, 0.05).unwrap());
        let yes: SharedClassifier = Arc::new(
            ScriptedClassifier::new("yes").with_default(LabelDistribution::new(0.05, 0.15, 0.8).unwrap()),
        );
        let ensemble = Ensemble::new(vec![yes]).unwrap();
        let out = build_contradiction_pairs(
            &[courtyard()],
            &base,
            Some(GenerationBackends {
                generator: &Parrot,
                ensemble: &ensemble,
            }),
            &PipelineConfig::default(),
        )
        .unwrap();
        assert!(out.is_empty());
    }

    fn rows(prefix: &str, n: usize, p: Provenance) -> Vec<AtomicInstance> {
        (0..n)
            .map(|i| AtomicInstance::new(format!("{prefix}{i}"), format!("premise {}", i % 4), format!("{prefix} atom {i}"), p))
            .collect()
    }

    #[test]
    fn assemble_caps_each_class() {
        let cfg = PipelineConfig {
            per_class_cap: Some(15),
            seed: 7,
            ..Default::default()
        };
        let split = assemble(
            SplitName::Train,
            rows("e", 10, Provenance::DirectEntailment),
            rows("n", 20, Provenance::DirectNeutral),
            rows("c", 30, Provenance::DirectContradiction),
            &cfg,
        )
        .unwrap();
        let r = split.atomic_rows().unwrap();
        let count = |l| r.iter().filter(|x| x.label == l).count();
        assert_eq!((count(Label::Entailment), count(Label::Neutral), count(Label::Contradiction)), (10, 15, 15));
        assert!(r.windows(2).all(|w| (&w[0].premise, &w[0].atom) <= (&w[1].premise, &w[1].atom)));
    }

    #[test]
    fn assemble_without_cap_is_sorted_concatenation() {
        let split = assemble(
            SplitName::Validation,
            rows("e", 3, Provenance::DirectEntailment),
            rows("n", 2, Provenance::RetrievedNeutral),
            vec![],
            &PipelineConfig::default(),
        )
        .unwrap();
        let r = split.atomic_rows().unwrap();
        assert_eq!(r.len(), 5);
        assert!(r.windows(2).all(|w| (&w[0].premise, &w[0].atom) <= (&w[1].premise, &w[1].atom)));
    }

    #[test]
    fn assemble_is_deterministic_per_seed() {
        let cfg = PipelineConfig {
            per_class_cap: Some(5),
            seed: 11,
            ..Default::default()
        };
        let run = || {
            assemble(
                SplitName::Train,
                rows("e", 9, Provenance::DirectEntailment),
                rows("n", 9, Provenance::DirectNeutral),
                rows("c", 9, Provenance::DirectContradiction),
                &cfg,
            )
            .unwrap()
        };
        let a = serde_json::to_string(run().atomic_rows().unwrap()).unwrap();
        let b = serde_json::to_string(run().atomic_rows().unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn test_split_keeps_gold_and_drops_invalid() {
        let blond = SentenceInstance::undecomposed(
            "blond",
            "A blond woman is looking at a camera that a brunette woman is holding in front of a wall with several pieces of art on it.",
            "A blond woman is holding a camera and looking at a wall with several pieces of sharks on it.",
            Label::Contradiction,
        );
        let single = SentenceInstance::undecomposed("one", "p", "A girl is swinging", Label::Entailment);
        let (split, dropped) = build_test_split(&[blond, single], &stub_decomposer(), 8).unwrap();
        let g = split.grouped_rows().unwrap();
        assert!(dropped.is_empty());
        assert_eq!(g[0].gold, Label::Contradiction);
        assert_eq!(g[0].atoms.len(), 2);
        assert_eq!(g[1].atoms.len(), 1);

        let too_many = SentenceInstance::undecomposed("x", "p", "A man is running and a dog is barking", Label::Neutral);
        let (split, dropped) = build_test_split(&[too_many], &stub_decomposer(), 1).unwrap();
        assert!(split.is_empty());
        assert_eq!(dropped, ["x"]);
    }

    #[test]
    fn premise_use_of_published_totals() {
        assert_eq!(round2(625_281.0 / 150_735.0), 4.15);
    }

    #[test]
    fn stats_fixture() {
        let mut r = Vec::new();
        for (i, p) in ["premise one", "premise two"].iter().enumerate() {
            r.push(AtomicInstance::new(format!("{i}a"), *p, "abcd", Provenance::DirectEntailment));
            r.push(AtomicInstance::new(format!("{i}b"), *p, "abcdef", Provenance::DirectNeutral));
            r.push(AtomicInstance::new(format!("{i}c"), *p, "ab", Provenance::GeneratedContradiction));
        }
        let s = stats(&DatasetSplit::atomic(SplitName::Train, r).unwrap()).unwrap();
        assert_eq!(s.total.instances, 6);
        assert_eq!(s.total.unique_premises, 2);
        assert_eq!(s.total.premise_use, 3.00);
        assert_eq!(s.total.avg_length, 4.0);
        assert_eq!(s.classes[&Label::Neutral].avg_length, 6.0);
        assert_eq!(s.classes[&Label::Neutral].premise_use, 1.0);
        assert!(s.atom_histogram.is_none());
    }

    #[test]
    fn stats_unique_premises() {
        let r = (0..4)
            .map(|i| AtomicInstance::new(format!("{i}"), format!("p{i}"), "a", Provenance::DirectEntailment))
            .collect();
        let s = stats(&DatasetSplit::atomic(SplitName::Validation, r).unwrap()).unwrap();
        assert_eq!(s.total.premise_use, 1.00);
    }

    #[test]
    fn stats_empty_split_fails() {
        assert!(matches!(stats(&DatasetSplit::grouped(vec![])), Err(Error::EmptySplit)));
    }
}
