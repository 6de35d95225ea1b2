//! Deterministic, model-free backends.
//!
//! These are test doubles with frozen constants. They are stable across
//! runs and platforms; they are not meant to be accurate.

use std::collections::HashSet;

use super::prompt::FACT_MARKER;
use super::{Classifier, Decomposer, Generator};
use crate::error::{Error, Result};
use crate::label::LabelDistribution;

/// Overlap ratio at or above which the stub calls a claim entailed.
pub const STUB_OVERLAP_THRESHOLD: f64 = 0.75;
pub const STUB_ENTAILMENT: [f64; 3] = [0.80, 0.15, 0.05];
pub const STUB_NEUTRAL: [f64; 3] = [0.15, 0.70, 0.15];
pub const STUB_CONTRADICTION: [f64; 3] = [0.05, 0.15, 0.80];

const NEGATIONS: &[&str] = &["no", "not", "never", "none"];

const STOPWORDS: &[&str] = &[
    "a", "an", "the", "is", "are", "was", "were", "be", "been", "being", "am", "of", "to", "in",
    "on", "at", "and", "or", "with", "by", "for", "from", "it", "its", "this", "that", "some",
    "there", "their", "his", "her",
];

#[derive(Debug, Default, PartialEq, Eq)]
struct Tokens {
    words: Vec<String>,
    negations: HashSet<String>,
}

fn tokenize(text: &str) -> Tokens {
    let mut out = Tokens::default();
    for raw in text.split_whitespace() {
        let w = raw.to_lowercase().replace('\u{2019}', "'");
        let w = w.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'');
        let w = w.trim_matches('\'');
        if w.is_empty() {
            continue;
        }
        if w.ends_with("n't") {
            out.negations.insert("n't".to_string());
            continue;
        }
        let w: String = w.chars().filter(|c| c.is_alphanumeric()).collect();
        if w.is_empty() {
            continue;
        }
        if NEGATIONS.contains(&w.as_str()) {
            out.negations.insert(w);
        } else {
            out.words.push(w);
        }
    }
    out
}

/// Word-overlap heuristic classifier.
///
/// A negation token present on one side only yields contradiction; otherwise
/// a content-word overlap of at least [`STUB_OVERLAP_THRESHOLD`] yields
/// entailment and anything else neutral.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubClassifier;

pub fn stub_classifier() -> StubClassifier {
    StubClassifier
}

impl StubClassifier {
    /// Fraction of the claim's distinct content words found in the premise.
    pub fn overlap(premise: &str, claim: &str) -> f64 {
        let p = tokenize(premise);
        let c = tokenize(claim);
        overlap_ratio(&p, &c)
    }
}

fn overlap_ratio(premise: &Tokens, claim: &Tokens) -> f64 {
    let premise_words: HashSet<&str> = premise.words.iter().map(String::as_str).collect();
    let mut content: HashSet<&str> = claim
        .words
        .iter()
        .map(String::as_str)
        .filter(|w| !STOPWORDS.contains(w))
        .collect();
    if content.is_empty() {
        content = claim.words.iter().map(String::as_str).collect();
    }
    if content.is_empty() {
        return 0.0;
    }
    let shared = content.iter().filter(|w| premise_words.contains(*w)).count();
    shared as f64 / content.len() as f64
}

impl Classifier for StubClassifier {
    fn name(&self) -> &str {
        "stub"
    }

    fn classify(&self, premise: &str, claim: &str) -> Result<LabelDistribution> {
        let c = tokenize(claim);
        if c.words.is_empty() && c.negations.is_empty() {
            return Err(Error::InvalidInput("claim is empty".into()));
        }
        let p = tokenize(premise);
        let triple = if c.negations != p.negations {
            STUB_CONTRADICTION
        } else if overlap_ratio(&p, &c) >= STUB_OVERLAP_THRESHOLD {
            STUB_ENTAILMENT
        } else {
            STUB_NEUTRAL
        };
        LabelDistribution::from_array(triple)
    }
}

const AUXILIARIES: &[&str] = &[
    "is", "are", "was", "were", "am", "be", "has", "have", "had", "will", "can", "does", "do", "did",
];

// -ing words that are rarely verbs.
const NOT_VERBS: &[&str] = &[
    "during", "thing", "things", "something", "anything", "nothing", "everything", "morning",
    "evening", "building", "buildings", "ceiling", "clothing", "king", "ring", "string", "spring",
    "wedding",
];

const DETERMINERS: &[&str] = &["a", "an", "the", "some", "his", "her", "their", "its", "this", "that"];

fn bare(word: &str) -> String {
    word.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase()
}

fn is_aux(word: &str) -> bool {
    AUXILIARIES.contains(&bare(word).as_str())
}

fn is_verbish(word: &str) -> bool {
    let w = bare(word);
    AUXILIARIES.contains(&w.as_str())
        || (w.len() > 4 && w.ends_with("ing") && !NOT_VERBS.contains(&w.as_str()))
}

fn clause_like(words: &[&str]) -> bool {
    words.iter().any(|w| is_verbish(w))
}

/// Rule-based splitter.
///
/// Splits on `and` when both sides look like clauses (each carries an
/// auxiliary or an -ing verb) and on `, which` / `, who`. Fragments that
/// start with a verb borrow the subject of the first fragment; relative
/// fragments borrow the noun phrase they attach to.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubDecomposer;

pub fn stub_decomposer() -> StubDecomposer {
    StubDecomposer
}

#[derive(Debug)]
struct Fragment<'a> {
    words: Vec<&'a str>,
    relative: bool,
}

fn split_relative(text: &str) -> Vec<(&str, bool)> {
    let lower = text.to_ascii_lowercase();
    let mut cuts = Vec::new();
    for marker in [", which ", ", who "] {
        let mut from = 0;
        while let Some(pos) = lower[from..].find(marker) {
            cuts.push(from + pos);
            from += pos + marker.len();
        }
    }
    cuts.sort();
    let mut out = Vec::new();
    let mut start = 0;
    let mut relative = false;
    for pos in cuts {
        out.push((&text[start..pos], relative));
        // skip ", " but keep the pronoun; it is stripped later
        start = pos + 2;
        relative = true;
    }
    out.push((&text[start..], relative));
    out
}

fn split_conjunctions<'a>(words: &[&'a str], relative: bool, out: &mut Vec<Fragment<'a>>) {
    let mut current: Vec<&'a str> = Vec::new();
    let mut first = true;
    let mut i = 0;
    while i < words.len() {
        let w = words[i];
        if bare(w) == "and" && !current.is_empty() {
            let right_end = words[i + 1..]
                .iter()
                .position(|x| bare(x) == "and")
                .map_or(words.len(), |p| i + 1 + p);
            let right = &words[i + 1..right_end];
            if !right.is_empty() && clause_like(&current) && clause_like(right) {
                out.push(Fragment {
                    words: std::mem::take(&mut current),
                    relative: relative && first,
                });
                first = false;
                i += 1;
                continue;
            }
        }
        current.push(w);
        i += 1;
    }
    if !current.is_empty() {
        out.push(Fragment {
            words: current,
            relative: relative && first,
        });
    }
}

fn clean(words: &[&str]) -> String {
    words
        .join(" ")
        .trim()
        .trim_end_matches([',', ';', '.', '!', '?'])
        .trim()
        .to_string()
}

impl Decomposer for StubDecomposer {
    fn name(&self) -> &str {
        "stub"
    }

    fn decompose(&self, hypothesis: &str) -> Result<Vec<String>> {
        let text = hypothesis.trim();
        if text.is_empty() {
            return Err(Error::InvalidInput("hypothesis is empty".into()));
        }

        let mut fragments = Vec::new();
        for (segment, relative) in split_relative(text) {
            let words: Vec<&str> = segment.split_whitespace().collect();
            split_conjunctions(&words, relative, &mut fragments);
        }
        if fragments.len() <= 1 {
            return Ok(vec![text.to_string()]);
        }

        let head = &fragments[0].words;
        let aux_pos = head.iter().position(|w| is_aux(w));
        let verb_pos = aux_pos.or_else(|| head.iter().position(|w| is_verbish(w)));
        let subject: Vec<&str> = head[..verb_pos.unwrap_or(0)].to_vec();
        let aux: Option<&str> = aux_pos.map(|p| head[p]);

        let mut atoms = vec![clean(head)];
        for (k, frag) in fragments.iter().enumerate().skip(1) {
            let mut words = frag.words.clone();
            if frag.relative {
                if words.first().is_some_and(|w| matches!(bare(w).as_str(), "which" | "who")) {
                    words.remove(0);
                }
                let prev = &fragments[k - 1].words;
                let antecedent = prev
                    .iter()
                    .rposition(|w| DETERMINERS.contains(&bare(w).as_str()))
                    .map(|p| prev[p..].to_vec())
                    .unwrap_or_else(|| subject.clone());
                let antecedent: Vec<&str> = antecedent
                    .iter()
                    .map(|w| w.trim_end_matches([',', ';']))
                    .collect();
                let mut full = antecedent;
                full.extend(words);
                atoms.push(clean(&full));
                continue;
            }
            let starts_with_verb = words.first().is_some_and(|w| is_verbish(w));
            if starts_with_verb && !subject.is_empty() {
                let mut full = subject.clone();
                if !is_aux(words[0]) {
                    if let Some(a) = aux {
                        full.push(a);
                    }
                }
                full.append(&mut words);
                atoms.push(clean(&full));
            } else {
                atoms.push(clean(&words));
            }
        }
        Ok(atoms.into_iter().filter(|a| !a.is_empty()).collect())
    }
}

/// Offline generator that negates the atom found in the prompt's task block.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubGenerator;

pub fn stub_generator() -> StubGenerator {
    StubGenerator
}

const QUANTIFIERS: &[&str] = &["a", "an", "the", "some", "one", "two", "three", "several", "many"];

/// Minimal contradicting edit: swap a leading quantifier for "No", else
/// negate the first copula, else wrap the whole fact.
pub fn negate_fact(atom: &str) -> String {
    let atom = atom.trim();
    let mut words: Vec<&str> = atom.split_whitespace().collect();
    let Some(first) = words.first().map(|w| bare(w)) else {
        return String::new();
    };
    if first == "no" {
        words[0] = "Some";
        return words.join(" ");
    }
    if QUANTIFIERS.contains(&first.as_str()) {
        words[0] = "No";
        return words.join(" ");
    }
    if let Some(pos) = words.iter().position(|w| matches!(*w, "is" | "are" | "was" | "were")) {
        words.insert(pos + 1, "not");
        return words.join(" ");
    }
    let mut chars = atom.chars();
    let lowered = match chars.next() {
        Some(c) => c.to_lowercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    };
    format!("It is not the case that {lowered}")
}

impl Generator for StubGenerator {
    fn name(&self) -> &str {
        "stub"
    }

    fn complete(&self, prompt: &str) -> Result<String> {
        let atom = prompt
            .lines()
            .rev()
            .find_map(|l| l.strip_prefix(FACT_MARKER))
            .map(str::trim)
            .filter(|a| !a.is_empty())
            .ok_or_else(|| Error::Backend("stub generator: prompt has no atomic fact".into()))?;
        Ok(format!("Contradiction: {}", negate_fact(atom)))
    }
}
