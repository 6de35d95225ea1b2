//! Instances, atoms and pipeline knobs.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;

/// Collapse runs of whitespace and trim.
pub fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Comparison key for atom texts: case-folded, whitespace-collapsed,
/// trailing sentence punctuation removed.
pub fn atom_key(s: &str) -> String {
    normalize_whitespace(&s.to_lowercase())
        .trim_end_matches(['.', '!', '?', ' '])
        .to_string()
}

/// One atomic fact extracted from a hypothesis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomicFact {
    pub text: String,
    pub source_id: String,
    pub index: usize,
}

impl AtomicFact {
    pub fn new(text: impl Into<String>, source_id: impl Into<String>, index: usize) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::InvalidInput("atomic fact text is empty".into()));
        }
        Ok(Self {
            text,
            source_id: source_id.into(),
            index,
        })
    }

    /// Build indexed facts for one source from plain texts.
    pub fn from_texts<S: AsRef<str>>(source_id: &str, texts: &[S]) -> Result<Vec<AtomicFact>> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| AtomicFact::new(t.as_ref(), source_id, i))
            .collect()
    }

    /// Identifier unique within a dataset: `<source_id>#<index>`.
    pub fn doc_id(&self) -> String {
        format!("{}#{}", self.source_id, self.index)
    }
}

/// A premise/hypothesis pair with its gold label and (once decomposed) atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceInstance {
    pub id: String,
    pub premise: String,
    pub hypothesis: String,
    pub gold: Label,
    pub atoms: Vec<AtomicFact>,
}

impl SentenceInstance {
    /// An instance that has not been decomposed yet.
    pub fn undecomposed(
        id: impl Into<String>,
        premise: impl Into<String>,
        hypothesis: impl Into<String>,
        gold: Label,
    ) -> Self {
        Self {
            id: id.into(),
            premise: premise.into(),
            hypothesis: hypothesis.into(),
            gold,
            atoms: Vec::new(),
        }
    }

    /// Attach atom texts, checking the decomposition invariants.
    pub fn with_atoms<S: AsRef<str>>(mut self, atoms: &[S], max_atoms: usize) -> Result<Self> {
        let facts = AtomicFact::from_texts(&self.id, atoms)?;
        validate_atoms(&facts, max_atoms)?;
        self.atoms = facts;
        Ok(self)
    }

    pub fn atom_texts(&self) -> Vec<&str> {
        self.atoms.iter().map(|a| a.text.as_str()).collect()
    }
}

/// A decomposition is valid when it has between 1 and `max_atoms`
/// non-empty, pairwise distinct atoms.
pub fn validate_atoms(atoms: &[AtomicFact], max_atoms: usize) -> Result<()> {
    if atoms.is_empty() {
        return Err(Error::InvalidInput("decomposition produced no atoms".into()));
    }
    if atoms.len() > max_atoms {
        return Err(Error::InvalidInput(format!(
            "decomposition produced {} atoms, maximum is {max_atoms}",
            atoms.len()
        )));
    }
    let mut seen = HashSet::new();
    for a in atoms {
        if a.text.trim().is_empty() {
            return Err(Error::InvalidInput("empty atom".into()));
        }
        if !seen.insert(atom_key(&a.text)) {
            return Err(Error::InvalidInput(format!("duplicate atom '{}'", a.text)));
        }
    }
    Ok(())
}

/// Where an atomic training triplet came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    DirectEntailment,
    DirectNeutral,
    RetrievedNeutral,
    DirectContradiction,
    GeneratedContradiction,
}

impl Provenance {
    pub fn label(self) -> Label {
        match self {
            Provenance::DirectEntailment => Label::Entailment,
            Provenance::DirectNeutral | Provenance::RetrievedNeutral => Label::Neutral,
            Provenance::DirectContradiction | Provenance::GeneratedContradiction => {
                Label::Contradiction
            }
        }
    }

    pub fn is_direct(self) -> bool {
        matches!(
            self,
            Provenance::DirectEntailment | Provenance::DirectNeutral | Provenance::DirectContradiction
        )
    }
}

/// One `(premise, atom, label)` triplet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomicInstance {
    pub id: String,
    pub premise: String,
    pub atom: String,
    pub label: Label,
    pub provenance: Provenance,
}

impl AtomicInstance {
    pub fn new(
        id: impl Into<String>,
        premise: impl Into<String>,
        atom: impl Into<String>,
        provenance: Provenance,
    ) -> Self {
        Self {
            id: id.into(),
            premise: premise.into(),
            atom: atom.into(),
            label: provenance.label(),
            provenance,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.provenance.label() == self.label
    }

    /// Deduplication key: whitespace-normalized premise and atom.
    pub fn dedup_key(&self) -> (String, String) {
        (normalize_whitespace(&self.premise), normalize_whitespace(&self.atom))
    }
}

/// Thresholds and knobs for dataset construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub tau_e: f64,
    pub tau_n: f64,
    pub tau_c: f64,
    pub retrieval_k: usize,
    pub bm25_k1: f64,
    pub bm25_b: f64,
    pub max_atoms: usize,
    pub per_class_cap: Option<usize>,
    pub seed: u64,
    /// Run the direct neutral/contradiction branches only over instances
    /// whose gold label matches the branch.
    pub direct_matching_gold_only: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            tau_e: 0.5,
            tau_n: 0.5,
            tau_c: 0.5,
            retrieval_k: 100,
            bm25_k1: 1.2,
            bm25_b: 0.75,
            max_atoms: 8,
            per_class_cap: None,
            seed: 0,
            direct_matching_gold_only: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("tau_e", self.tau_e), ("tau_n", self.tau_n), ("tau_c", self.tau_c)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {t}")));
            }
        }
        if self.retrieval_k == 0 {
            return Err(Error::Config("retrieval_k must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.bm25_b) {
            return Err(Error::Config(format!("bm25_b must lie in [0, 1], got {}", self.bm25_b)));
        }
        if !self.bm25_k1.is_finite() || self.bm25_k1 < 0.0 {
            return Err(Error::Config(format!("bm25_k1 must be non-negative, got {}", self.bm25_k1)));
        }
        if self.max_atoms == 0 {
            return Err(Error::Config("max_atoms must be at least 1".into()));
        }
        if self.per_class_cap == Some(0) {
            return Err(Error::Config("per_class_cap must be positive when set".into()));
        }
        Ok(())
    }
}
