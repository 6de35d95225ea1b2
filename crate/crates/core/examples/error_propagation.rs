//! How per-atom errors compound under the strict rule: with per-atom
//! accuracy q, entailment recall on n-atom hypotheses falls like q^n.
//!
//! `cargo run --release --example error_propagation`

use std::io::Write;

use atomic_nli::simulate::strict_entailment_recall;

pub fn run(out: &mut dyn Write, samples: usize) -> atomic_nli::Result<Vec<(usize, f64, f64)>> {
    let q: f64 = 0.9;
    let mut rows = Vec::new();
    writeln!(out, "per-atom accuracy q = {q}, {samples} instances per row")?;
    writeln!(out, "{:>5} {:>10} {:>10}", "atoms", "measured", "q^n")?;
    for n in 1..=5 {
        let measured = strict_entailment_recall(q, n, samples, n as u64)?;
        let expected = q.powi(n as i32);
        writeln!(out, "{n:>5} {measured:>10.4} {expected:>10.4}")?;
        rows.push((n, measured, expected));
    }
    Ok(rows)
}

#[allow(dead_code)]
fn main() -> atomic_nli::Result<()> {
    run(&mut std::io::stdout(), 10_000).map(|_| ())
}
