//! Retrieve lexically similar atoms with BM25 and keep those the
//! classifier calls neutral.
//!
//! `cargo run --example bm25_neutral_mining`

use std::io::Write;

use atomic_nli::backends::stub_classifier;
use atomic_nli::retrieval::{rerank_by_neutrality, Bm25Index};

pub fn run(out: &mut dyn Write) -> atomic_nli::Result<Vec<(String, f64)>> {
    let corpus = [
        ("a#0", "A man is playing a guitar."),
        ("b#0", "A man is walking a dog in a park."),
        ("b#1", "The dog is brown."),
        ("c#0", "A woman is playing a violin on a stage."),
        ("d#0", "Children are building a sandcastle."),
    ];
    let index = Bm25Index::build(corpus, 1.2, 0.75)?;
    let premise = "A man is playing a guitar on a stage.";

    writeln!(out, "BM25 top 4 for: {premise}")?;
    let hits = index.query_docs(premise, 4);
    for (doc, score) in &hits {
        writeln!(out, "  {:<5} {score:.4}  {}", doc.id, doc.text)?;
    }

    // a#0 stands in for an atom of the premise's own instance
    let candidates: Vec<(String, String)> = hits
        .iter()
        .filter(|(doc, _)| !doc.id.starts_with("a#"))
        .map(|(doc, _)| (doc.id.clone(), doc.text.clone()))
        .collect();
    let kept = rerank_by_neutrality(premise, &candidates, &stub_classifier(), 0.5)?;
    writeln!(out, "neutral after re-ranking:")?;
    for (id, p_n) in &kept {
        writeln!(out, "  {id:<5} p_n={p_n:.2}")?;
    }
    Ok(kept)
}

#[allow(dead_code)]
fn main() -> atomic_nli::Result<()> {
    run(&mut std::io::stdout()).map(|_| ())
}
