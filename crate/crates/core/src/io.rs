//! JSON Lines readers and writers.
//!
//! * sentence input: `{id, premise, hypothesis, label}`, extra fields ignored
//! * grouped split: `{id, premise, hypothesis, label, atoms: [string]}`
//! * atomic split: `{id, premise, atom, label, provenance}`
//!
//! Blank lines are skipped. Malformed records fail with their 1-based line
//! number.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::construct::{DatasetSplit, SplitData};
use crate::error::{Error, Result};
use crate::label::Label;
use crate::types::{AtomicInstance, SentenceInstance};

#[derive(Debug, Clone, Deserialize)]
struct SentenceRecord {
    #[serde(alias = "pairID")]
    id: String,
    #[serde(alias = "sentence1")]
    premise: String,
    #[serde(alias = "sentence2")]
    hypothesis: String,
    #[serde(alias = "gold_label")]
    label: Label,
}

/// Test-split row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedRecord {
    #[serde(alias = "pairID")]
    pub id: String,
    #[serde(alias = "sentence1")]
    pub premise: String,
    #[serde(alias = "sentence2")]
    pub hypothesis: String,
    #[serde(alias = "gold_label")]
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none", alias = "atomic_facts")]
    pub atoms: Option<Vec<String>>,
}

impl From<&SentenceInstance> for GroupedRecord {
    fn from(s: &SentenceInstance) -> Self {
        Self {
            id: s.id.clone(),
            premise: s.premise.clone(),
            hypothesis: s.hypothesis.clone(),
            label: s.gold,
            atoms: Some(s.atoms.iter().map(|a| a.text.clone()).collect()),
        }
    }
}

fn record_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Record {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Parse JSON Lines from a reader; `path` is only used in messages.
pub fn parse_jsonl<T: DeserializeOwned, R: BufRead>(reader: R, path: &Path) -> Result<Vec<(usize, T)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| record_err(path, i + 1, e.to_string()))?;
        out.push((i + 1, rec));
    }
    Ok(out)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    parse_jsonl(BufReader::new(File::open(path)?), path)
}

fn check_unique<'a>(path: &Path, ids: impl Iterator<Item = (usize, &'a str)>) -> Result<()> {
    let mut seen = HashSet::new();
    for (line, id) in ids {
        if !seen.insert(id) {
            return Err(record_err(path, line, format!("duplicate id '{id}'")));
        }
    }
    Ok(())
}

/// Sentence-level pairs, not yet decomposed.
pub fn read_sentences(path: &Path) -> Result<Vec<SentenceInstance>> {
    let rows: Vec<(usize, SentenceRecord)> = read_jsonl(path)?;
    check_unique(path, rows.iter().map(|(l, r)| (*l, r.id.as_str())))?;
    Ok(rows
        .into_iter()
        .map(|(_, r)| SentenceInstance::undecomposed(r.id, r.premise, r.hypothesis, r.label))
        .collect())
}

/// Grouped instances. A missing `atoms` field leaves the instance
/// undecomposed unless `require_atoms` is set; an empty or invalid atom
/// list is always an error.
pub fn read_grouped(path: &Path, require_atoms: bool, max_atoms: usize) -> Result<Vec<SentenceInstance>> {
    let rows: Vec<(usize, GroupedRecord)> = read_jsonl(path)?;
    check_unique(path, rows.iter().map(|(l, r)| (*l, r.id.as_str())))?;
    rows.into_iter()
        .map(|(line, r)| {
            let inst = SentenceInstance::undecomposed(r.id, r.premise, r.hypothesis, r.label);
            match r.atoms {
                None if require_atoms => Err(record_err(path, line, "missing field `atoms`")),
                None => Ok(inst),
                Some(atoms) if atoms.is_empty() => Err(record_err(path, line, "`atoms` must not be empty")),
                Some(atoms) => inst
                    .with_atoms(&atoms, max_atoms)
                    .map_err(|e| record_err(path, line, e.to_string())),
            }
        })
        .collect()
}

/// Atomic triplets; the label must match the provenance.
pub fn read_atomic(path: &Path) -> Result<Vec<AtomicInstance>> {
    let rows: Vec<(usize, AtomicInstance)> = read_jsonl(path)?;
    rows.into_iter()
        .map(|(line, r)| {
            if r.is_consistent() {
                Ok(r)
            } else {
                Err(record_err(
                    path,
                    line,
                    format!("label {} does not match provenance {:?}", r.label, r.provenance),
                ))
            }
        })
        .collect()
}

pub fn write_jsonl_to<T: Serialize, W: Write>(mut w: W, rows: impl IntoIterator<Item = T>) -> Result<()> {
    for row in rows {
        serde_json::to_writer(&mut w, &row)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    write_jsonl_to(BufWriter::new(File::create(path)?), rows)
}

/// Pretty JSON followed by a newline.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Write a split as `<dir>/<name>.jsonl` and return the path.
pub fn write_split(dir: &Path, split: &DatasetSplit) -> Result<PathBuf> {
    let path = dir.join(format!("{}.jsonl", split.name));
    match &split.data {
        SplitData::Atomic(rows) => write_jsonl(&path, rows)?,
        SplitData::Grouped(rows) => write_jsonl(&path, rows.iter().map(GroupedRecord::from))?,
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Provenance;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn sentences_skip_blank_lines_and_extra_fields() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "in.jsonl",
            "{\"id\":\"1\",\"premise\":\"p\",\"hypothesis\":\"h\",\"label\":\"Neutral\",\"x\":1}\n\n\
             {\"pairID\":\"2\",\"sentence1\":\"p\",\"sentence2\":\"h2\",\"gold_label\":\"entailment\"}\n",
        );
        let rows = read_sentences(&p).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].gold, Label::Neutral);
        assert_eq!(rows[1].id, "2");
    }

    #[test]
    fn sentences_report_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "in.jsonl",
            "{\"id\":\"1\",\"premise\":\"p\",\"hypothesis\":\"h\",\"label\":\"neutral\"}\n\
             {\"id\":\"2\",\"premise\":\"p\",\"label\":\"neutral\"}\n",
        );
        match read_sentences(&p) {
            Err(Error::Record { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("hypothesis"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let rec = "{\"id\":\"1\",\"premise\":\"p\",\"hypothesis\":\"h\",\"label\":\"neutral\"}\n";
        let p = write(&dir, "in.jsonl", &rec.repeat(2));
        assert!(matches!(read_sentences(&p), Err(Error::Record { line: 2, .. })));
    }

    #[test]
    fn grouped_atoms_rules() {
        let dir = tempfile::tempdir().unwrap();
        let none = write(&dir, "a.jsonl", "{\"id\":\"1\",\"premise\":\"p\",\"hypothesis\":\"h\",\"label\":\"neutral\"}\n");
        assert!(read_grouped(&none, false, 8).unwrap()[0].atoms.is_empty());
        assert!(read_grouped(&none, true, 8).is_err());
        let empty = write(
            &dir,
            "b.jsonl",
            "{\"id\":\"1\",\"premise\":\"p\",\"hypothesis\":\"h\",\"label\":\"neutral\",\"atoms\":[]}\n",
        );
        assert!(matches!(read_grouped(&empty, false, 8), Err(Error::Record { line: 1, .. })));
        let dup = write(
            &dir,
            "c.jsonl",
            "{\"id\":\"1\",\"premise\":\"p\",\"hypothesis\":\"h\",\"label\":\"neutral\",\"atoms\":[\"x\",\"X.\"]}\n",
        );
        assert!(read_grouped(&dup, false, 8).is_err());
    }

    #[test]
    fn split_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![
            AtomicInstance::new("a#0", "p", "x", Provenance::DirectEntailment),
            AtomicInstance::new("a#1", "p", "y", Provenance::RetrievedNeutral),
        ];
        let split = DatasetSplit::atomic(crate::construct::SplitName::Train, rows.clone()).unwrap();
        let path = write_split(dir.path(), &split).unwrap();
        assert!(path.ends_with("train.jsonl"));
        assert_eq!(read_atomic(&path).unwrap(), rows);

        let test = vec![SentenceInstance::undecomposed("t", "p", "a and b", Label::Entailment)
            .with_atoms(&["a", "b"], 8)
            .unwrap()];
        let path = write_split(dir.path(), &DatasetSplit::grouped(test.clone())).unwrap();
        assert_eq!(read_grouped(&path, true, 8).unwrap(), test);
    }

    #[test]
    fn atomic_label_must_match_provenance() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "t.jsonl",
            "{\"id\":\"a\",\"premise\":\"p\",\"atom\":\"x\",\"label\":\"neutral\",\"provenance\":\"direct-entailment\"}\n",
        );
        assert!(read_atomic(&p).is_err());
    }
}
