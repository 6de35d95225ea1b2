use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use super::Classifier;
use crate::error::{Error, Result};
use crate::label::LabelDistribution;
use crate::types::normalize_whitespace;

/// Lookup-table classifier.
///
/// Answers from an exact `(premise, claim)` entry first, then a claim-only
/// entry, then the default. Texts are compared after whitespace
/// normalization. Useful for replaying recorded model outputs.
#[derive(Debug, Clone, Default)]
pub struct ScriptedClassifier {
    name: String,
    by_pair: HashMap<(String, String), LabelDistribution>,
    by_claim: HashMap<String, LabelDistribution>,
    default: Option<LabelDistribution>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScriptFile {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    entries: Vec<ScriptEntry>,
    #[serde(default)]
    default: Option<LabelDistribution>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScriptEntry {
    #[serde(default)]
    premise: Option<String>,
    claim: String,
    p_e: f64,
    p_n: f64,
    p_c: f64,
}

impl ScriptedClassifier {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn with_pair(mut self, premise: &str, claim: &str, d: LabelDistribution) -> Self {
        self.by_pair
            .insert((normalize_whitespace(premise), normalize_whitespace(claim)), d);
        self
    }

    pub fn with_claim(mut self, claim: &str, d: LabelDistribution) -> Self {
        self.by_claim.insert(normalize_whitespace(claim), d);
        self
    }

    pub fn with_default(mut self, d: LabelDistribution) -> Self {
        self.default = Some(d);
        self
    }

    /// Load a table of the form
    /// `{"entries": [{"premise": .., "claim": .., "p_e": .., "p_n": .., "p_c": ..}], "default": {..}}`.
    pub fn from_json_str(json: &str) -> Result<Self> {
        let file: ScriptFile = serde_json::from_str(json)?;
        let mut out = ScriptedClassifier::new(file.name.unwrap_or_else(|| "scripted".into()));
        for e in file.entries {
            let d = LabelDistribution::new(e.p_e, e.p_n, e.p_c)?;
            out = match e.premise {
                Some(p) => out.with_pair(&p, &e.claim, d),
                None => out.with_claim(&e.claim, d),
            };
        }
        out.default = file.default;
        Ok(out)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

impl Classifier for ScriptedClassifier {
    fn name(&self) -> &str {
        &self.name
    }

    fn classify(&self, premise: &str, claim: &str) -> Result<LabelDistribution> {
        let claim = normalize_whitespace(claim);
        self.by_pair
            .get(&(normalize_whitespace(premise), claim.clone()))
            .or_else(|| self.by_claim.get(&claim))
            .or(self.default.as_ref())
            .copied()
            .ok_or_else(|| Error::Backend(format!("{}: no scripted output for claim '{claim}'", self.name)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::Label;

    #[test]
    fn lookup_precedence() {
        let c = ScriptedClassifier::new("s")
            .with_pair("p1", "x", LabelDistribution::one_hot(Label::Contradiction))
            .with_claim("x", LabelDistribution::one_hot(Label::Entailment))
            .with_default(LabelDistribution::one_hot(Label::Neutral));
        assert_eq!(c.classify("p1", "x").unwrap().argmax(), Label::Contradiction);
        assert_eq!(c.classify("p2", " x ").unwrap().argmax(), Label::Entailment);
        assert_eq!(c.classify("p2", "y").unwrap().argmax(), Label::Neutral);
    }

    #[test]
    fn missing_entry_is_backend_error() {
        let c = ScriptedClassifier::new("s");
        assert!(c.classify("p", "x").unwrap_err().is_backend());
    }

    #[test]
    fn parses_table() {
        let c = ScriptedClassifier::from_json_str(
            r#"{"entries": [{"claim": "a", "p_e": 0.1, "p_n": 0.1, "p_c": 0.8}],
                "default": {"p_e": 1.0, "p_n": 0.0, "p_c": 0.0}}"#,
        )
        .unwrap();
        assert_eq!(c.classify("p", "a").unwrap().contradiction(), 0.8);
        assert_eq!(c.classify("p", "b").unwrap().argmax(), Label::Entailment);
        assert!(ScriptedClassifier::from_json_str(
            r#"{"entries": [{"claim": "a", "p_e": 0.5, "p_n": 0.5, "p_c": 0.5}]}"#
        )
        .is_err());
    }
}
