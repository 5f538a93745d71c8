//! Forcing the sign of an edge by raising its coupling past the sum of its
//! neighbours on one side.

use std::sync::Arc;

use ea_lab::disorder::{default_margin, is_supersatisfied, sample_couplings, super_satisfy, supersatisfied_threshold, DistributionSpec};
use ea_lab::excitation::critical_contour;
use ea_lab::lattice::{build_dual, square_box};
use ea_lab::solver::solve;

fn main() -> ea_lab::Result<()> {
    let geom = Arc::new(square_box(3)?);
    let dual = build_dual(&geom);
    let j = sample_couplings(geom.clone(), &DistributionSpec::gaussian(1.0), 5, 0)?;
    let s = 40;
    let before = solve(&j, None)?.edge_sign(&geom, s);

    let threshold = supersatisfied_threshold(&j, s);
    let forced = super_satisfy(&j, s, before.flip(), default_margin(threshold))?;
    let after = solve(&forced, None)?.edge_sign(&geom, s);
    println!("edge {s}: J = {:+.4}, threshold {threshold:.4}", j.value(s));
    println!("  ground-state sign {} -> {} with J = {:+.4}", before.symbol(), after.symbol(), forced.value(s));
    println!("  super-satisfied: {}", is_supersatisfied(&forced, s));

    let endpoints = geom.edge(s).endpoints();
    let mut in_contour = Vec::new();
    for p in (0..geom.num_edges()).filter(|&p| p != s) {
        if critical_contour(&forced, &dual, p)?.contains(s) {
            in_contour.push(p);
        }
    }
    println!("  edges whose critical contour contains {s}: {in_contour:?}");
    for p in in_contour {
        let shared: Vec<_> = geom.edge(p).endpoints().into_iter().filter(|v| endpoints.contains(v)).collect();
        println!("    {p} shares endpoint {shared:?}");
    }
    Ok(())
}
