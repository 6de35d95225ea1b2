//! Evaluate strict, summation and sentence-level prediction side by side,
//! bucketed by atom count.
//!
//! `cargo run --example stratified_report`

use std::io::Write;
use std::path::Path;

use atomic_nli::backends::{stub_classifier, stub_decomposer};
use atomic_nli::construct::build_test_split;
use atomic_nli::evaluate::{compare_modes, EvalOptions, ModeComparison};
use atomic_nli::io::read_sentences;

pub fn run(out: &mut dyn Write) -> atomic_nli::Result<ModeComparison> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/snli_30.jsonl");
    let sentences = read_sentences(&path)?;
    let (test, _) = build_test_split(&sentences, &stub_decomposer(), 8)?;
    let test = test.grouped_rows().unwrap_or_default().to_vec();

    let cmp = compare_modes(&test, &stub_classifier(), &EvalOptions { max_stratum: 3 })?;
    write!(out, "{}", cmp.to_table())?;
    writeln!(out)?;
    write!(out, "{}", cmp.strict.to_table())?;
    Ok(cmp)
}

#[allow(dead_code)]
fn main() -> atomic_nli::Result<()> {
    run(&mut std::io::stdout()).map(|_| ())
}
