//! Exact ground state of one seeded instance, checked against local flips.
//!
//! ```bash
//! cargo run --release --example solve_ground_state -- 3 42
//! ```
//! Arguments: box half-width `n` (box is `[-n, n] × [0, 2n]`) and seed.

use std::sync::Arc;

use ea_lab::disorder::{sample_couplings, DistributionSpec};
use ea_lab::lattice::square_box;
use ea_lab::solver::{solve, verify_gsp, VerifyOptions};

fn main() -> ea_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(3, |a| a.parse().expect("n"));
    let seed: u64 = args.next().map_or(42, |a| a.parse().expect("seed"));

    let geom = Arc::new(square_box(n)?);
    let j = sample_couplings(geom.clone(), &DistributionSpec::gaussian(1.0), seed, 0)?;
    let gs = solve(&j, None)?;

    println!("{}x{} box, seed {seed}", geom.width(), geom.height());
    println!("energy {:.6} ({:.6} per spin), tie: {}", gs.energy(), gs.energy() / geom.num_vertices() as f64, gs.tie());
    // Top row first.
    for r in (0..geom.height()).rev() {
        let row: String = (0..geom.width())
            .map(|c| if gs.spin(geom.vertex(c, r)) > 0 { '+' } else { '-' })
            .collect();
        println!("  {row}");
    }

    let report = verify_gsp(&j, &gs, &VerifyOptions::default())?;
    println!(
        "local check: {} subsets, {} dual circuits/paths, {} violations",
        report.subsets_checked,
        report.walks_checked,
        report.subset_violations.len() + report.walk_violations.len()
    );
    Ok(())
}
