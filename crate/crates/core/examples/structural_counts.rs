//! Lattice sizes from system counts alone, for every kernel shape of degree
//! `n` (default 4). Nothing is assembled, so this reaches shapes whose
//! lattices are too large to materialize.
//!
//!     cargo run --release --example structural_counts -- 5

use std::collections::BTreeSet;
use std::time::Instant;

use varcong::synthesis::Synthesizer;
use varcong::transform::Transformation;
use varcong::variant::VariantContext;

fn main() -> varcong::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let cap = 5_000_000;
    let mut seen = BTreeSet::new();
    for a in Transformation::all(n).filter(Transformation::is_idempotent) {
        let ctx = VariantContext::from_transformation(&a)?;
        let mut shape = ctx.sandwich().block_sizes();
        shape.sort_unstable();
        if !seen.insert(shape.clone()) {
            continue;
        }
        let start = Instant::now();
        let syn = Synthesizer::new(&ctx)?;
        match syn.count_structurally(cap) {
            Ok(c) => println!(
                "{a}  blocks {shape:?}  |P| = {}  |[Δ,λ]| = {}  |[Δ,ρ]| = {}  |Cong(P)| = {}  ({:.2?})",
                ctx.p.len(),
                c.lambda_interval,
                c.rho_interval,
                c.total,
                start.elapsed()
            ),
            Err(e) => println!("{a}  blocks {shape:?}  |P| = {}  {e}", ctx.p.len()),
        }
    }
    Ok(())
}
