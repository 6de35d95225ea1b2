//! Split hypotheses into atomic facts with the rule-based decomposer.
//!
//! `cargo run --example decompose_hypotheses`

use std::io::Write;

use atomic_nli::backends::{decompose_into, stub_decomposer};

pub fn run(out: &mut dyn Write) -> atomic_nli::Result<Vec<usize>> {
    let decomposer = stub_decomposer();
    let hypotheses = [
        "Men are throwing books and talking outside in a courtyard.",
        "A man is holding a dog, which is barking.",
        "A man and a woman are walking.",
        "Two kids are swimming and laughing, who are wearing goggles.",
    ];
    let mut counts = Vec::new();
    for (i, h) in hypotheses.iter().enumerate() {
        let atoms = decompose_into(&decomposer, &format!("h{i}"), h, 8)?;
        writeln!(out, "{h}")?;
        for a in &atoms {
            writeln!(out, "  [{}] {}", a.doc_id(), a.text)?;
        }
        counts.push(atoms.len());
    }
    Ok(counts)
}

#[allow(dead_code)]
fn main() -> atomic_nli::Result<()> {
    run(&mut std::io::stdout()).map(|_| ())
}
