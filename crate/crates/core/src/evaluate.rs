//! Stratified evaluation: confusion matrices and one-vs-rest metrics per
//! atom-count bucket, for strict-rule, summation and sentence-level
//! prediction.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::aggregate::{verdict_from_dists, AggregationMode};
use crate::backends::{classify_pairs, Classifier};
use crate::construct::score_atoms;
use crate::error::{Error, Result};
use crate::label::Label;
use crate::types::SentenceInstance;

pub const REPORT_SCHEMA_VERSION: &str = "atomic-nli/eval/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    Strict,
    Sum,
    /// Classify `(premise, hypothesis)` directly; atoms only decide the stratum.
    Sentence,
}

impl EvalMode {
    pub const ALL: [EvalMode; 3] = [EvalMode::Strict, EvalMode::Sum, EvalMode::Sentence];

    pub fn as_str(self) -> &'static str {
        match self {
            EvalMode::Strict => "strict",
            EvalMode::Sum => "sum",
            EvalMode::Sentence => "sentence",
        }
    }
}

impl std::fmt::Display for EvalMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EvalMode::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown mode '{s}'")))
    }
}

/// `counts[gold][predicted]`, indexed by [`Label::index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionMatrix {
    pub fn add(&mut self, gold: Label, pred: Label) {
        self.counts[gold.index()][pred.index()] += 1;
    }

    pub fn get(&self, gold: Label, pred: Label) -> u64 {
        self.counts[gold.index()][pred.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..3).map(|i| self.counts[i][i]).sum()
    }

    pub fn true_positives(&self, c: Label) -> u64 {
        self.get(c, c)
    }

    pub fn false_positives(&self, c: Label) -> u64 {
        Label::ALL.iter().filter(|g| **g != c).map(|g| self.get(*g, c)).sum()
    }

    pub fn false_negatives(&self, c: Label) -> u64 {
        Label::ALL.iter().filter(|p| **p != c).map(|p| self.get(c, *p)).sum()
    }

    /// Gold count of a class.
    pub fn support(&self, c: Label) -> u64 {
        self.counts[c.index()].iter().sum()
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for g in 0..3 {
            for p in 0..3 {
                self.counts[g][p] += other.counts[g][p];
            }
        }
    }
}

pub fn confusion(gold: &[Label], pred: &[Label]) -> Result<ConfusionMatrix> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::EmptySequence("confusion"));
    }
    let mut m = ConfusionMatrix::default();
    for (g, p) in gold.iter().zip(pred) {
        m.add(*g, *p);
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn prf(tp: u64, fp: u64, fn_: u64) -> ClassMetrics {
    let precision = ratio(tp as f64, (tp + fp) as f64);
    let recall = ratio(tp as f64, (tp + fn_) as f64);
    let f1 = ratio(2.0 * precision * recall, precision + recall);
    ClassMetrics { precision, recall, f1 }
}

/// One-vs-rest precision, recall and F1. Any zero denominator yields 0.
pub fn class_metrics(m: &ConfusionMatrix, c: Label) -> Result<ClassMetrics> {
    if m.total() == 0 {
        return Err(Error::EmptySequence("class_metrics: confusion matrix"));
    }
    Ok(prf(m.true_positives(c), m.false_positives(c), m.false_negatives(c)))
}

/// One class row; `accuracy` repeats the stratum accuracy, as in the
/// published table layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumReport {
    pub support: u64,
    pub correct: u64,
    pub accuracy: f64,
    pub classes: BTreeMap<Label, ClassRow>,
    /// Unweighted mean of the per-class metrics.
    pub macro_avg: ClassMetrics,
    /// Pooled counts; equals accuracy for single-label data.
    pub micro_avg: ClassMetrics,
    pub confusion: ConfusionMatrix,
}

impl StratumReport {
    pub fn from_confusion(m: ConfusionMatrix) -> Result<Self> {
        let support = m.total();
        if support == 0 {
            return Err(Error::EmptySequence("stratum"));
        }
        let correct = m.correct();
        let accuracy = correct as f64 / support as f64;
        let mut classes = BTreeMap::new();
        let mut macro_sum = [0.0; 3];
        for c in Label::ALL {
            let cm = class_metrics(&m, c)?;
            macro_sum[0] += cm.precision;
            macro_sum[1] += cm.recall;
            macro_sum[2] += cm.f1;
            classes.insert(
                c,
                ClassRow {
                    accuracy,
                    precision: cm.precision,
                    recall: cm.recall,
                    f1: cm.f1,
                    support: m.support(c),
                },
            );
        }
        let (tp, fp, fn_) = Label::ALL.iter().fold((0, 0, 0), |acc, c| {
            (
                acc.0 + m.true_positives(*c),
                acc.1 + m.false_positives(*c),
                acc.2 + m.false_negatives(*c),
            )
        });
        Ok(Self {
            support,
            correct,
            accuracy,
            classes,
            macro_avg: ClassMetrics {
                precision: macro_sum[0] / 3.0,
                recall: macro_sum[1] / 3.0,
                f1: macro_sum[2] / 3.0,
            },
            micro_avg: prf(tp, fp, fn_),
            confusion: m,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalOptions {
    /// Atom counts at or above this are folded into one final bucket.
    pub max_stratum: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { max_stratum: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: String,
    pub mode: EvalMode,
    pub max_stratum: usize,
    /// Keyed by atom count; the key `max_stratum` holds every larger count
    /// too, and `0` holds instances without atoms (sentence mode only).
    pub strata: BTreeMap<usize, StratumReport>,
    pub overall: StratumReport,
}

pub fn stratum_key(atoms: usize, opts: &EvalOptions) -> usize {
    atoms.min(opts.max_stratum)
}

pub fn stratum_name(key: usize, opts: &EvalOptions) -> String {
    if key == opts.max_stratum {
        format!("{key}+")
    } else {
        key.to_string()
    }
}

/// Predicted label per instance.
pub fn predict(test: &[SentenceInstance], classifier: &dyn Classifier, mode: EvalMode) -> Result<Vec<Label>> {
    match mode {
        EvalMode::Sentence => {
            let pairs: Vec<(&str, &str)> = test.iter().map(|i| (i.premise.as_str(), i.hypothesis.as_str())).collect();
            Ok(classify_pairs(classifier, &pairs)?.iter().map(|d| d.argmax()).collect())
        }
        EvalMode::Strict | EvalMode::Sum => {
            if let Some(bad) = test.iter().find(|i| i.atoms.is_empty()) {
                return Err(Error::InvalidInput(format!("instance '{}' has no atoms", bad.id)));
            }
            let agg = if mode == EvalMode::Strict {
                AggregationMode::Strict
            } else {
                AggregationMode::Sum
            };
            let scores = score_atoms(test, classifier)?;
            test.iter()
                .zip(scores)
                .map(|(inst, dists)| {
                    let texts = inst.atoms.iter().map(|a| a.text.clone()).collect();
                    Ok(verdict_from_dists(&inst.id, texts, dists, agg)?.aggregated)
                })
                .collect()
        }
    }
}

/// Assemble a report from gold labels, predictions and atom counts.
pub fn report_from_predictions(
    gold: &[Label],
    pred: &[Label],
    atom_counts: &[usize],
    mode: EvalMode,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let overall = confusion(gold, pred)?;
    if atom_counts.len() != gold.len() {
        return Err(Error::LengthMismatch {
            gold: gold.len(),
            pred: atom_counts.len(),
        });
    }
    let mut buckets: BTreeMap<usize, ConfusionMatrix> = BTreeMap::new();
    for ((g, p), n) in gold.iter().zip(pred).zip(atom_counts) {
        buckets.entry(stratum_key(*n, opts)).or_default().add(*g, *p);
    }
    let strata = buckets
        .into_iter()
        .map(|(k, m)| Ok((k, StratumReport::from_confusion(m)?)))
        .collect::<Result<_>>()?;
    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION.to_string(),
        mode,
        max_stratum: opts.max_stratum,
        strata,
        overall: StratumReport::from_confusion(overall)?,
    })
}

pub fn stratified_eval(
    test: &[SentenceInstance],
    classifier: &dyn Classifier,
    mode: EvalMode,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let pred = predict(test, classifier, mode)?;
    let gold: Vec<Label> = test.iter().map(|i| i.gold).collect();
    let counts: Vec<usize> = test.iter().map(|i| i.atoms.len()).collect();
    report_from_predictions(&gold, &pred, &counts, mode, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyDeltas {
    pub sum_minus_strict: f64,
    pub sum_minus_sentence: f64,
    pub strict_minus_sentence: f64,
}

impl AccuracyDeltas {
    fn of(strict: &StratumReport, sum: &StratumReport, sentence: &StratumReport) -> Self {
        Self {
            sum_minus_strict: sum.accuracy - strict.accuracy,
            sum_minus_sentence: sum.accuracy - sentence.accuracy,
            strict_minus_sentence: strict.accuracy - sentence.accuracy,
        }
    }
}

/// The three modes over identical inputs, with accuracy deltas per stratum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeComparison {
    pub strict: EvalReport,
    pub sum: EvalReport,
    pub sentence: EvalReport,
    pub deltas: BTreeMap<usize, AccuracyDeltas>,
    pub overall_deltas: AccuracyDeltas,
}

pub fn compare_modes(test: &[SentenceInstance], classifier: &dyn Classifier, opts: &EvalOptions) -> Result<ModeComparison> {
    let strict = stratified_eval(test, classifier, EvalMode::Strict, opts)?;
    let sum = stratified_eval(test, classifier, EvalMode::Sum, opts)?;
    let sentence = stratified_eval(test, classifier, EvalMode::Sentence, opts)?;
    let deltas = strict
        .strata
        .iter()
        .map(|(k, st)| (*k, AccuracyDeltas::of(st, &sum.strata[k], &sentence.strata[k])))
        .collect();
    let overall_deltas = AccuracyDeltas::of(&strict.overall, &sum.overall, &sentence.overall);
    Ok(ModeComparison {
        strict,
        sum,
        sentence,
        deltas,
        overall_deltas,
    })
}

impl EvalReport {
    fn rows(&self) -> Vec<(String, &StratumReport)> {
        let opts = EvalOptions {
            max_stratum: self.max_stratum,
        };
        self.strata
            .iter()
            .map(|(k, s)| (stratum_name(*k, &opts), s))
            .chain(std::iter::once(("overall".to_string(), &self.overall)))
            .collect()
    }

    /// Aligned text table, one line per stratum and class.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mode: {}", self.mode);
        let _ = writeln!(
            out,
            "{:<8} {:<14} {:>8} {:>9} {:>8} {:>8} {:>8}",
            "atoms", "class", "accuracy", "precision", "recall", "f1", "support"
        );
        for (name, s) in self.rows() {
            for (label, row) in &s.classes {
                let _ = writeln!(
                    out,
                    "{:<8} {:<14} {:>8.2} {:>9.2} {:>8.2} {:>8.2} {:>8}",
                    name,
                    label.as_str(),
                    row.accuracy * 100.0,
                    row.precision * 100.0,
                    row.recall * 100.0,
                    row.f1 * 100.0,
                    row.support
                );
            }
            for (avg, m) in [("macro", &s.macro_avg), ("micro", &s.micro_avg)] {
                let _ = writeln!(
                    out,
                    "{:<8} {:<14} {:>8.2} {:>9.2} {:>8.2} {:>8.2} {:>8}",
                    name,
                    avg,
                    s.accuracy * 100.0,
                    m.precision * 100.0,
                    m.recall * 100.0,
                    m.f1 * 100.0,
                    s.support
                );
            }
        }
        out
    }

    /// `stratum,class,metric,value` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mode,stratum,class,metric,value\n");
        for (name, s) in self.rows() {
            for (label, row) in &s.classes {
                for (metric, v) in [
                    ("accuracy", row.accuracy),
                    ("precision", row.precision),
                    ("recall", row.recall),
                    ("f1", row.f1),
                    ("support", row.support as f64),
                ] {
                    let _ = writeln!(out, "{},{},{},{},{}", self.mode, name, label, metric, v);
                }
            }
            for (avg, m) in [("macro", &s.macro_avg), ("micro", &s.micro_avg)] {
                for (metric, v) in [("precision", m.precision), ("recall", m.recall), ("f1", m.f1)] {
                    let _ = writeln!(out, "{},{},{},{},{}", self.mode, name, avg, metric, v);
                }
            }
        }
        out
    }
}

impl ModeComparison {
    pub fn to_table(&self) -> String {
        let opts = EvalOptions {
            max_stratum: self.strict.max_stratum,
        };
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<8} {:>8} {:>8} {:>8} {:>8} {:>12} {:>14}",
            "atoms", "support", "strict", "sum", "sentence", "sum-strict", "sum-sentence"
        );
        let rows = self
            .deltas
            .iter()
            .map(|(k, d)| (stratum_name(*k, &opts), *k, d))
            .collect::<Vec<_>>();
        for (name, k, d) in rows {
            let _ = writeln!(
                out,
                "{:<8} {:>8} {:>8.2} {:>8.2} {:>8.2} {:>+12.2} {:>+14.2}",
                name,
                self.strict.strata[&k].support,
                self.strict.strata[&k].accuracy * 100.0,
                self.sum.strata[&k].accuracy * 100.0,
                self.sentence.strata[&k].accuracy * 100.0,
                d.sum_minus_strict * 100.0,
                d.sum_minus_sentence * 100.0
            );
        }
        let d = &self.overall_deltas;
        let _ = writeln!(
            out,
            "{:<8} {:>8} {:>8.2} {:>8.2} {:>8.2} {:>+12.2} {:>+14.2}",
            "overall",
            self.strict.overall.support,
            self.strict.overall.accuracy * 100.0,
            self.sum.overall.accuracy * 100.0,
            self.sentence.overall.accuracy * 100.0,
            d.sum_minus_strict * 100.0,
            d.sum_minus_sentence * 100.0
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::ScriptedClassifier;
    use crate::label::LabelDistribution;
    use Label::{Contradiction as C, Entailment as E, Neutral as N};

    #[test]
    fn confusion_counts() {
        let m = confusion(&[E, E, C], &[E, N, C]).unwrap();
        assert_eq!(m.get(E, E), 1);
        assert_eq!(m.get(E, N), 1);
        assert_eq!(m.get(C, C), 1);
        assert_eq!(m.total(), 3);
    }

    #[test]
    fn confusion_identity_is_diagonal() {
        let g = [E, N, C, C, N];
        let m = confusion(&g, &g).unwrap();
        for a in Label::ALL {
            for b in Label::ALL {
                if a != b {
                    assert_eq!(m.get(a, b), 0);
                }
            }
        }
        for c in Label::ALL {
            let cm = class_metrics(&m, c).unwrap();
            assert_eq!((cm.precision, cm.recall, cm.f1), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn confusion_errors() {
        assert!(matches!(confusion(&[E], &[E, N]), Err(Error::LengthMismatch { .. })));
        assert!(confusion(&[], &[]).is_err());
        assert!(class_metrics(&ConfusionMatrix::default(), E).is_err());
    }

    #[test]
    fn absent_class_scores_zero() {
        let m = confusion(&[E, C], &[E, C]).unwrap();
        let cm = class_metrics(&m, N).unwrap();
        assert_eq!((cm.precision, cm.recall, cm.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn hand_computed_metrics() {
        // gold E: 3 -> E,E,N   gold N: 2 -> N,C   gold C: 1 -> E
        let m = confusion(&[E, E, E, N, N, C], &[E, E, N, N, C, E]).unwrap();
        let e = class_metrics(&m, E).unwrap();
        // TP=2 FP=1 FN=1
        assert_eq!(e.precision, 2.0 / 3.0);
        assert_eq!(e.recall, 2.0 / 3.0);
        let n = class_metrics(&m, N).unwrap();
        // TP=1 FP=1 FN=1
        assert_eq!((n.precision, n.recall), (0.5, 0.5));
        let c = class_metrics(&m, C).unwrap();
        // TP=0 FP=1 FN=1
        assert_eq!((c.precision, c.recall, c.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn relabeling_permutes_metrics() {
        let gold = [E, E, E, N, N, C, C, N];
        let pred = [E, N, C, N, E, C, N, N];
        let swap = |l: Label| match l {
            E => C,
            C => E,
            N => N,
        };
        let m = confusion(&gold, &pred).unwrap();
        let gs: Vec<_> = gold.iter().map(|l| swap(*l)).collect();
        let ps: Vec<_> = pred.iter().map(|l| swap(*l)).collect();
        let ms = confusion(&gs, &ps).unwrap();
        for c in Label::ALL {
            assert_eq!(class_metrics(&m, c).unwrap(), class_metrics(&ms, swap(c)).unwrap());
        }
    }

    fn grouped(id: &str, gold: Label, atoms: &[&str]) -> SentenceInstance {
        SentenceInstance::undecomposed(id, format!("premise {id}"), format!("hyp {id}"), gold)
            .with_atoms(atoms, 8)
            .unwrap()
    }

    #[test]
    fn perfect_classifier_scores_one_everywhere() {
        let test = vec![
            grouped("1", E, &["e1"]),
            grouped("2", N, &["e2", "n2"]),
            grouped("3", C, &["e3", "n3", "c3"]),
        ];
        let mut cls = ScriptedClassifier::new("oracle");
        for (claim, l) in [("e1", E), ("e2", E), ("n2", N), ("e3", E), ("n3", N), ("c3", C)] {
            cls = cls.with_claim(claim, LabelDistribution::one_hot(l));
        }
        cls = cls
            .with_claim("hyp 1", LabelDistribution::one_hot(E))
            .with_claim("hyp 2", LabelDistribution::one_hot(N))
            .with_claim("hyp 3", LabelDistribution::one_hot(C));
        for mode in [EvalMode::Strict, EvalMode::Sentence] {
            let r = stratified_eval(&test, &cls, mode, &EvalOptions::default()).unwrap();
            assert!(r.strata.values().all(|s| s.accuracy == 1.0));
            assert_eq!(r.overall.accuracy, 1.0);
        }
    }

    #[test]
    fn overflow_strata_fold_into_last_bucket() {
        let test = vec![
            grouped("1", E, &["a"]),
            grouped("2", E, &["a", "b", "c"]),
            grouped("3", E, &["a", "b", "c", "d"]),
        ];
        let cls = ScriptedClassifier::new("e").with_default(LabelDistribution::one_hot(E));
        let r = stratified_eval(&test, &cls, EvalMode::Strict, &EvalOptions { max_stratum: 3 }).unwrap();
        assert_eq!(r.strata.keys().copied().collect::<Vec<_>>(), [1, 3]);
        assert_eq!(r.strata[&3].support, 2);
        assert!(r.to_table().contains("3+"));
    }

    #[test]
    fn sentence_mode_ignores_atoms() {
        let test = vec![grouped("1", E, &["a"]), grouped("2", N, &["a", "b"])];
        let cls = ScriptedClassifier::new("s")
            .with_claim("hyp 1", LabelDistribution::one_hot(E))
            .with_claim("hyp 2", LabelDistribution::one_hot(C));
        let with = predict(&test, &cls, EvalMode::Sentence).unwrap();
        let stripped: Vec<_> = test
            .iter()
            .cloned()
            .map(|mut i| {
                i.atoms.clear();
                i
            })
            .collect();
        let without = predict(&stripped, &cls, EvalMode::Sentence).unwrap();
        assert_eq!(with, without);
        let a = stratified_eval(&test, &cls, EvalMode::Sentence, &EvalOptions::default()).unwrap();
        let b = stratified_eval(&stripped, &cls, EvalMode::Sentence, &EvalOptions::default()).unwrap();
        assert_eq!(a.overall, b.overall);
        assert!(stratified_eval(&stripped, &cls, EvalMode::Strict, &EvalOptions::default()).is_err());
    }

    #[test]
    fn csv_has_one_row_per_metric() {
        let test = vec![grouped("1", E, &["a"])];
        let cls = ScriptedClassifier::new("e").with_default(LabelDistribution::one_hot(E));
        let r = stratified_eval(&test, &cls, EvalMode::Sum, &EvalOptions::default()).unwrap();
        let csv = r.to_csv();
        // (1 stratum + overall) * (3 classes * 5 + 2 averages * 3)
        assert_eq!(csv.lines().count(), 1 + 2 * (15 + 6));
        assert!(csv.contains("sum,1,entailment,recall,1"));
    }

    #[test]
    fn mode_parses() {
        assert_eq!("Sum".parse::<EvalMode>().unwrap(), EvalMode::Sum);
        assert!("vote".parse::<EvalMode>().is_err());
    }
}
