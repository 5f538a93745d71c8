//! Critical value of one edge: the closed form from the two excited states,
//! a bisection on the ground-state label, and a sweep of the coupling.

use std::sync::Arc;

use ea_lab::disorder::{sample_couplings, DistributionSpec};
use ea_lab::excitation::{bond_excitation, flip_census, locate_flip_point};
use ea_lab::lab::EdgeSpec;
use ea_lab::lattice::square_box;

fn main() -> ea_lab::Result<()> {
    let geom = Arc::new(square_box(2)?);
    let b = EdgeSpec::central(&geom).resolve(&geom)?;
    let j = sample_couplings(geom.clone(), &DistributionSpec::gaussian(1.0), 7, 0)?;

    let x = bond_excitation(&j, b)?;
    let flip = locate_flip_point(&j, b)?;
    println!("edge {b}: J_b = {:+.6}", j.value(b));
    println!("critical value      {:+.12}", x.critical_value);
    println!("bisection           [{:+.12}, {:+.12}] after {} steps", flip.lo, flip.hi, flip.iterations);

    let c = x.critical_value;
    let grid: Vec<f64> = (0..13).map(|i| c - 1.5 + 0.25 * i as f64 + 0.01).collect();
    let census = flip_census(&j, b, &grid)?;
    for (v, label) in census.values.iter().zip(&census.labels) {
        println!("  J_b = {v:+.3} -> {}", label.symbol());
    }
    println!("label changes after grid points {:?}", census.transitions);
    Ok(())
}
