use crate::error::{Error, Result};

/// Few-shot prompt asking a language model for a minimal contradicting edit.
/// `{premise}` and `{atomic_fact}` are substituted by
/// [`render_contradiction_prompt`].
pub const CONTRADICTION_PROMPT_TEMPLATE: &str = "\
You are a linguistic contradiction generator. Your task is to create a minimally modified version of a given atomic fact that contradicts the premise, while maintaining grammaticality and semantic coherence.

Instructions:
1. Create a contradiction by modifying ONLY 1\u{2013}2 key elements in the atomic fact.
2. Maintain the same grammatical structure and length.
3. Ensure the modified fact directly contradicts the premise.
4. Keep high lexical similarity with the original fact.
5. The contradiction must be clear and unambiguous.

Example 1:
Premise: A soccer game with multiple males playing.
Original Atomic Fact: Some men are playing a sport.
Contradiction: No men are playing a sport.

Example 2:
Premise: A woman is playing the guitar in a park.
Original Atomic Fact: A person is playing an instrument.
Contradiction: No person is playing an instrument.

Task:
Premise: {premise}
Original Atomic Fact: {atomic_fact}
Contradiction:";

pub(crate) const FACT_MARKER: &str = "Original Atomic Fact:";
const ANSWER_MARKER: &str = "Contradiction:";

pub fn render_contradiction_prompt(premise: &str, atom: &str) -> Result<String> {
    if premise.trim().is_empty() {
        return Err(Error::InvalidInput("premise is empty".into()));
    }
    if atom.trim().is_empty() {
        return Err(Error::InvalidInput("atomic fact is empty".into()));
    }
    Ok(CONTRADICTION_PROMPT_TEMPLATE
        .replace("{premise}", premise.trim())
        .replace("{atomic_fact}", atom.trim()))
}

const QUOTES: &[char] = &['"', '\'', '`', '\u{201c}', '\u{201d}', '\u{2018}', '\u{2019}'];

/// Pull the rewrite out of a raw completion: the first non-empty line after
/// the last `Contradiction:` marker, or the first non-empty line when the
/// marker is absent.
pub fn parse_generation(raw: &str) -> Result<String> {
    let tail = match raw.rfind(ANSWER_MARKER) {
        Some(pos) => &raw[pos + ANSWER_MARKER.len()..],
        None => raw,
    };
    let line = tail.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    let cleaned = line.trim_matches(|c: char| c.is_whitespace() || QUOTES.contains(&c));
    if cleaned.is_empty() {
        return Err(Error::EmptyExtraction);
    }
    Ok(cleaned.to_string())
}
