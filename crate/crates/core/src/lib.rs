//! Atomic-level natural language inference.
//!
//! Hypotheses are split into atomic facts, each fact is classified against
//! the premise, and the atom labels are folded back into a sentence-level
//! verdict. The crate also builds atomic training data and evaluates
//! classifiers stratified by atom count.

pub mod aggregate;
pub mod cli;
pub mod backends;
pub mod config;
pub mod construct;
pub mod error;
pub mod evaluate;
pub mod io;
pub mod label;
pub mod retrieval;
pub mod simulate;
pub mod types;

pub use aggregate::{aggregate_strict, aggregate_sum, judge, AggregationMode, Verdict};
pub use error::{Error, Result};
pub use label::{argmax_label, parse_label, Label, LabelDistribution, ScoreTriple};
pub use types::{AtomicFact, AtomicInstance, PipelineConfig, Provenance, SentenceInstance};
