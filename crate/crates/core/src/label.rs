//! The three-way NLI label space and its probability forms.
//!
//! Components are always stored in `(entailment, neutral, contradiction)`
//! order. Ties in [`argmax_label`] resolve by [`Label::precedence`]:
//! contradiction outranks neutral, which outranks entailment.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `p_e + p_n + p_c = 1`.
pub const SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "&'static str")]
pub enum Label {
    Entailment,
    Neutral,
    Contradiction,
}

impl Label {
    /// Component order used by [`LabelDistribution`] and [`ScoreTriple`].
    pub const ALL: [Label; 3] = [Label::Entailment, Label::Neutral, Label::Contradiction];

    /// Tie-break order, highest first.
    pub const BY_PRECEDENCE: [Label; 3] = [Label::Contradiction, Label::Neutral, Label::Entailment];

    pub fn index(self) -> usize {
        match self {
            Label::Entailment => 0,
            Label::Neutral => 1,
            Label::Contradiction => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Label::ALL.get(i).copied()
    }

    /// Larger wins ties.
    pub fn precedence(self) -> u8 {
        match self {
            Label::Entailment => 0,
            Label::Neutral => 1,
            Label::Contradiction => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Entailment => "entailment",
            Label::Neutral => "neutral",
            Label::Contradiction => "contradiction",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_label(s)
    }
}

impl TryFrom<String> for Label {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        parse_label(&s)
    }
}

impl From<Label> for &'static str {
    fn from(l: Label) -> Self {
        l.as_str()
    }
}

/// Case-insensitive parse of the three canonical label strings.
pub fn parse_label(s: &str) -> Result<Label> {
    let trimmed = s.trim();
    Label::ALL
        .into_iter()
        .find(|l| l.as_str().eq_ignore_ascii_case(trimmed))
        .ok_or_else(|| Error::UnknownLabel(s.to_string()))
}

/// A normalized probability distribution over the three labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabelDistribution {
    p_e: f64,
    p_n: f64,
    p_c: f64,
}

impl LabelDistribution {
    pub fn new(p_e: f64, p_n: f64, p_c: f64) -> Result<Self> {
        let bad = |reason| Error::InvalidDistribution {
            e: p_e,
            n: p_n,
            c: p_c,
            reason,
        };
        for p in [p_e, p_n, p_c] {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(bad("components must lie in [0, 1]"));
            }
        }
        if ((p_e + p_n + p_c) - 1.0).abs() > SUM_TOLERANCE {
            return Err(bad("components must sum to 1"));
        }
        Ok(Self { p_e, p_n, p_c })
    }

    /// All mass on one label.
    pub fn one_hot(label: Label) -> Self {
        let mut p = [0.0; 3];
        p[label.index()] = 1.0;
        Self {
            p_e: p[0],
            p_n: p[1],
            p_c: p[2],
        }
    }

    pub fn from_array(p: [f64; 3]) -> Result<Self> {
        Self::new(p[0], p[1], p[2])
    }

    pub fn entailment(&self) -> f64 {
        self.p_e
    }

    pub fn neutral(&self) -> f64 {
        self.p_n
    }

    pub fn contradiction(&self) -> f64 {
        self.p_c
    }

    pub fn get(&self, label: Label) -> f64 {
        self.as_array()[label.index()]
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.p_e, self.p_n, self.p_c]
    }

    pub fn argmax(&self) -> Label {
        argmax_label(self.as_array())
    }
}

impl<'de> Deserialize<'de> for LabelDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            p_e: f64,
            p_n: f64,
            p_c: f64,
        }
        let raw = Raw::deserialize(d)?;
        LabelDistribution::new(raw.p_e, raw.p_n, raw.p_c).map_err(serde::de::Error::custom)
    }
}

/// Unnormalized, non-negative per-label accumulators.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ScoreTriple {
    pub s_e: f64,
    pub s_n: f64,
    pub s_c: f64,
}

impl ScoreTriple {
    pub fn new(s_e: f64, s_n: f64, s_c: f64) -> Result<Self> {
        if [s_e, s_n, s_c].iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidScores);
        }
        Ok(Self { s_e, s_n, s_c })
    }

    pub fn add(&mut self, d: &LabelDistribution) {
        self.s_e += d.p_e;
        self.s_n += d.p_n;
        self.s_c += d.p_c;
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.s_e, self.s_n, self.s_c]
    }

    pub fn argmax(&self) -> Label {
        argmax_label(self.as_array())
    }
}

/// Anything that can be read as three per-label scores in
/// `(entailment, neutral, contradiction)` order.
pub trait LabelScores {
    fn scores(&self) -> [f64; 3];
}

impl LabelScores for LabelDistribution {
    fn scores(&self) -> [f64; 3] {
        self.as_array()
    }
}

impl LabelScores for ScoreTriple {
    fn scores(&self) -> [f64; 3] {
        self.as_array()
    }
}

impl LabelScores for [f64; 3] {
    fn scores(&self) -> [f64; 3] {
        *self
    }
}

/// Label of the largest component; exact ties go to the label with the
/// highest precedence.
pub fn argmax_label<S: LabelScores>(scores: S) -> Label {
    let s = scores.scores();
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Label::BY_PRECEDENCE
        .into_iter()
        .find(|l| s[l.index()] == max)
        .unwrap_or(Label::Contradiction)
}
