//! Turning per-atom verdicts into one sentence-level label.
//!
//! Two aggregators are provided and they are allowed to disagree:
//! [`aggregate_strict`] applies the logical rules (any contradiction wins,
//! then any neutral, else entailment) while [`aggregate_sum`] adds the
//! per-atom distributions and takes the argmax. For one-hot inputs the
//! sum is a majority vote, so `[E, E, C]` is contradiction under the
//! strict rules and entailment under summation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backends::Classifier;
use crate::error::{Error, Result};
use crate::label::{Label, LabelDistribution, ScoreTriple};
use crate::types::AtomicFact;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregationMode {
    Strict,
    Sum,
}

impl std::fmt::Display for AggregationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AggregationMode::Strict => "strict",
            AggregationMode::Sum => "sum",
        })
    }
}

pub fn aggregate_strict(labels: &[Label]) -> Result<Label> {
    if labels.is_empty() {
        return Err(Error::EmptySequence("aggregate_strict"));
    }
    Ok(if labels.contains(&Label::Contradiction) {
        Label::Contradiction
    } else if labels.contains(&Label::Neutral) {
        Label::Neutral
    } else {
        Label::Entailment
    })
}

/// Component-wise sum (unnormalized) and its argmax.
///
/// Each component is summed in ascending value order, so the result is
/// bit-identical under any permutation of the input.
pub fn aggregate_sum(dists: &[LabelDistribution]) -> Result<(Label, ScoreTriple)> {
    if dists.is_empty() {
        return Err(Error::EmptySequence("aggregate_sum"));
    }
    let mut sums = [0.0; 3];
    let mut column = Vec::with_capacity(dists.len());
    for (k, sum) in sums.iter_mut().enumerate() {
        column.clear();
        column.extend(dists.iter().map(|d| d.as_array()[k]));
        column.sort_by(f64::total_cmp);
        *sum = column.iter().sum();
    }
    let total = ScoreTriple::new(sums[0], sums[1], sums[2])?;
    Ok((total.argmax(), total))
}

/// The explanation object: per-atom verdicts plus the aggregated label.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub instance_id: String,
    pub atom_texts: Vec<String>,
    pub atom_labels: Vec<Label>,
    pub atom_dists: Vec<LabelDistribution>,
    pub aggregated: Label,
    pub mode: AggregationMode,
    /// Present iff `mode` is [`AggregationMode::Sum`].
    pub summed: Option<ScoreTriple>,
}

impl Verdict {
    pub fn to_record(&self) -> VerdictRecord {
        VerdictRecord {
            id: self.instance_id.clone(),
            mode: self.mode,
            atoms: self
                .atom_texts
                .iter()
                .zip(&self.atom_labels)
                .zip(&self.atom_dists)
                .map(|((text, label), d)| AtomRecord {
                    text: text.clone(),
                    label: *label,
                    p_e: d.entailment(),
                    p_n: d.neutral(),
                    p_c: d.contradiction(),
                })
                .collect(),
            aggregated: self.aggregated,
            summed: self.summed,
        }
    }
}

/// JSON form of a [`Verdict`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictRecord {
    pub id: String,
    pub mode: AggregationMode,
    pub atoms: Vec<AtomRecord>,
    pub aggregated: Label,
    pub summed: Option<ScoreTriple>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomRecord {
    pub text: String,
    pub label: Label,
    pub p_e: f64,
    pub p_n: f64,
    pub p_c: f64,
}

/// Aggregate already-computed atom distributions.
pub fn verdict_from_dists(
    instance_id: &str,
    atom_texts: Vec<String>,
    atom_dists: Vec<LabelDistribution>,
    mode: AggregationMode,
) -> Result<Verdict> {
    let atom_labels: Vec<Label> = atom_dists.iter().map(LabelDistribution::argmax).collect();
    let (aggregated, summed) = match mode {
        AggregationMode::Strict => (aggregate_strict(&atom_labels)?, None),
        AggregationMode::Sum => {
            let (label, sum) = aggregate_sum(&atom_dists)?;
            (label, Some(sum))
        }
    };
    Ok(Verdict {
        instance_id: instance_id.to_string(),
        atom_texts,
        atom_labels,
        atom_dists,
        aggregated,
        mode,
        summed,
    })
}

/// Classify every atom against the premise and aggregate.
///
/// Atoms are scored in parallel; on failure the lowest failing atom index
/// is reported.
pub fn judge(
    premise: &str,
    atoms: &[AtomicFact],
    classifier: &dyn Classifier,
    mode: AggregationMode,
) -> Result<Verdict> {
    if atoms.is_empty() {
        return Err(Error::EmptySequence("judge: atoms"));
    }
    let results: Vec<Result<LabelDistribution>> = atoms
        .par_iter()
        .map(|a| classifier.classify(premise, &a.text))
        .collect();
    let mut dists = Vec::with_capacity(atoms.len());
    for (index, r) in results.into_iter().enumerate() {
        dists.push(r.map_err(|e| Error::AtomFailed {
            index,
            source: Box::new(e),
        })?);
    }
    let id = atoms[0].source_id.clone();
    let texts = atoms.iter().map(|a| a.text.clone()).collect();
    verdict_from_dists(&id, texts, dists, mode)
}
