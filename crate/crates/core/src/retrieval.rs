//! Okapi BM25 over atomic facts, plus the neutrality re-ranker used to mine
//! neutral pairs.
//!
//! Scoring, for the distinct terms `t` of a query and a document `D`:
//!
//! ```text
//! score(q, D) = Σ IDF(t) · f(t,D)·(k1 + 1) / (f(t,D) + k1·(1 − b + b·|D|/avgdl))
//! IDF(t)      = ln((N − df(t) + 0.5) / (df(t) + 0.5) + 1)
//! ```
//!
//! The `+ 1` inside the logarithm keeps IDF positive, so every document
//! sharing a term with the query scores above zero.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backends::{classify_pairs, Classifier};
use crate::error::{Error, Result};

pub const INDEX_FORMAT_VERSION: &str = "atomic-nli/bm25/1";

/// Lowercase, split on runs of non-alphanumeric characters, drop empties.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedDoc {
    pub id: String,
    pub text: String,
    pub tokens: Vec<String>,
}

/// Immutable BM25 index.
#[derive(Debug, Clone)]
pub struct Bm25Index {
    docs: Vec<IndexedDoc>,
    df: HashMap<String, usize>,
    // term -> [(doc position, term frequency)], ascending doc position
    postings: HashMap<String, Vec<(usize, u32)>>,
    avgdl: f64,
    k1: f64,
    b: f64,
}

#[derive(Serialize, Deserialize)]
struct IndexFile {
    version: String,
    k1: f64,
    b: f64,
    docs: Vec<IndexFileDoc>,
}

#[derive(Serialize, Deserialize)]
struct IndexFileDoc {
    id: String,
    text: String,
}

impl Bm25Index {
    /// Build an index from `(doc_id, text)` pairs.
    pub fn build<I, S, T>(docs: I, k1: f64, b: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let mut seen = HashSet::new();
        let mut indexed = Vec::new();
        for (id, text) in docs {
            let id = id.into();
            if !seen.insert(id.clone()) {
                return Err(Error::DuplicateId(id));
            }
            let text = text.into();
            let tokens = tokenize(&text);
            indexed.push(IndexedDoc { id, text, tokens });
        }
        if indexed.is_empty() {
            return Err(Error::EmptyCorpus);
        }

        let mut postings: HashMap<String, Vec<(usize, u32)>> = HashMap::new();
        for (pos, doc) in indexed.iter().enumerate() {
            let mut tf: HashMap<&str, u32> = HashMap::new();
            for t in &doc.tokens {
                *tf.entry(t.as_str()).or_default() += 1;
            }
            for (t, f) in tf {
                postings.entry(t.to_string()).or_default().push((pos, f));
            }
        }
        let df = postings.iter().map(|(t, p)| (t.clone(), p.len())).collect();
        let total: usize = indexed.iter().map(|d| d.tokens.len()).sum();
        let avgdl = total as f64 / indexed.len() as f64;
        Ok(Self {
            docs: indexed,
            df,
            postings,
            avgdl,
            k1,
            b,
        })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn avgdl(&self) -> f64 {
        self.avgdl
    }

    pub fn df(&self, term: &str) -> usize {
        self.df.get(term).copied().unwrap_or(0)
    }

    pub fn doc_len(&self, doc_id: &str) -> Option<usize> {
        self.docs.iter().find(|d| d.id == doc_id).map(|d| d.tokens.len())
    }

    pub fn params(&self) -> (f64, f64) {
        (self.k1, self.b)
    }

    pub fn docs(&self) -> &[IndexedDoc] {
        &self.docs
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.docs.len() as f64;
        let df = self.df(term) as f64;
        ((n - df + 0.5) / (df + 0.5) + 1.0).ln()
    }

    /// Top `k` documents by score. Zero scores are never returned; ties are
    /// broken by ascending doc id.
    pub fn query(&self, text: &str, k: usize) -> Vec<(String, f64)> {
        self.query_positions(text, k)
            .into_iter()
            .map(|(pos, s)| (self.docs[pos].id.clone(), s))
            .collect()
    }

    /// Like [`query`](Self::query) but returns the indexed documents.
    pub fn query_docs(&self, text: &str, k: usize) -> Vec<(&IndexedDoc, f64)> {
        self.query_positions(text, k)
            .into_iter()
            .map(|(pos, s)| (&self.docs[pos], s))
            .collect()
    }

    fn query_positions(&self, text: &str, k: usize) -> Vec<(usize, f64)> {
        let mut terms: Vec<String> = Vec::new();
        for t in tokenize(text) {
            if !terms.contains(&t) {
                terms.push(t);
            }
        }
        let mut scores: HashMap<usize, f64> = HashMap::new();
        for term in &terms {
            let Some(list) = self.postings.get(term) else {
                continue;
            };
            let idf = self.idf(term);
            for &(pos, f) in list {
                let f = f as f64;
                let len = self.docs[pos].tokens.len() as f64;
                let norm = self.k1 * (1.0 - self.b + self.b * len / self.avgdl);
                *scores.entry(pos).or_insert(0.0) += idf * f * (self.k1 + 1.0) / (f + norm);
            }
        }
        let mut ranked: Vec<(usize, f64)> = scores.into_iter().filter(|(_, s)| *s > 0.0).collect();
        ranked.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.docs[a.0].id.cmp(&self.docs[b.0].id))
        });
        ranked.truncate(k);
        ranked
    }

    /// Write the corpus and parameters as versioned JSON. Statistics are
    /// recomputed on load.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = IndexFile {
            version: INDEX_FORMAT_VERSION.to_string(),
            k1: self.k1,
            b: self.b,
            docs: self
                .docs
                .iter()
                .map(|d| IndexFileDoc {
                    id: d.id.clone(),
                    text: d.text.clone(),
                })
                .collect(),
        };
        let writer = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(writer, &file)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let reader = std::io::BufReader::new(std::fs::File::open(path)?);
        let file: IndexFile = serde_json::from_reader(reader)?;
        if file.version != INDEX_FORMAT_VERSION {
            return Err(Error::IndexVersion(file.version));
        }
        Self::build(file.docs.into_iter().map(|d| (d.id, d.text)), file.k1, file.b)
    }
}

/// Score each candidate against the premise, keep those with
/// `p_n > tau_n`, and order by `p_n` descending then doc id ascending.
pub fn rerank_by_neutrality(
    premise: &str,
    candidates: &[(String, String)],
    classifier: &dyn Classifier,
    tau_n: f64,
) -> Result<Vec<(String, f64)>> {
    let pairs: Vec<(&str, &str)> = candidates.iter().map(|(_, text)| (premise, text.as_str())).collect();
    let dists = classify_pairs(classifier, &pairs)?;
    let mut kept: Vec<(String, f64)> = candidates
        .iter()
        .zip(dists)
        .filter(|(_, d)| d.neutral() > tau_n)
        .map(|((id, _), d)| (id.clone(), d.neutral()))
        .collect();
    kept.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(kept)
}
