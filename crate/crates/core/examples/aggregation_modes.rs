//! Strict rule vs probability summation on the same atom scores.
//!
//! `cargo run --example aggregation_modes`

use std::io::Write;

use atomic_nli::{aggregate_strict, aggregate_sum, Label, LabelDistribution};

pub fn run(out: &mut dyn Write) -> atomic_nli::Result<Vec<(Label, Label)>> {
    let cases: Vec<(&str, Vec<LabelDistribution>)> = vec![
        (
            "one clear contradiction among entailments",
            [Label::Entailment, Label::Entailment, Label::Contradiction]
                .map(LabelDistribution::one_hot)
                .to_vec(),
        ),
        (
            "a weak contradiction outvoted",
            vec![
                LabelDistribution::new(0.90, 0.05, 0.05)?,
                LabelDistribution::new(0.85, 0.10, 0.05)?,
                LabelDistribution::new(0.30, 0.25, 0.45)?,
            ],
        ),
        (
            "all atoms entailed",
            vec![LabelDistribution::new(0.7, 0.2, 0.1)?, LabelDistribution::new(0.6, 0.3, 0.1)?],
        ),
    ];
    let mut results = Vec::new();
    writeln!(out, "{:<45} {:<14} {:<14} summed (e, n, c)", "case", "strict", "sum")?;
    for (name, dists) in cases {
        let labels: Vec<Label> = dists.iter().map(|d| d.argmax()).collect();
        let strict = aggregate_strict(&labels)?;
        let (sum, triple) = aggregate_sum(&dists)?;
        writeln!(
            out,
            "{name:<45} {:<14} {:<14} ({:.2}, {:.2}, {:.2})",
            strict.as_str(),
            sum.as_str(),
            triple.s_e,
            triple.s_n,
            triple.s_c
        )?;
        results.push((strict, sum));
    }
    Ok(results)
}

#[allow(dead_code)]
fn main() -> atomic_nli::Result<()> {
    run(&mut std::io::stdout()).map(|_| ())
}
