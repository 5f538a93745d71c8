//! Excitation energies between clamps on a small vertex set, split into the
//! part carried by couplings inside the set and the exterior part.

use std::sync::Arc;

use ea_lab::disorder::{sample_couplings, DistributionSpec};
use ea_lab::excitation::excitation;
use ea_lab::lattice::square_box;
use ea_lab::solver::Clamp;
use ea_lab::Sign::{Minus, Plus};

fn main() -> ea_lab::Result<()> {
    let geom = Arc::new(square_box(2)?);
    let j = sample_couplings(geom.clone(), &DistributionSpec::gaussian(1.0), 17, 0)?;
    let a = [geom.vertex(1, 1), geom.vertex(2, 1), geom.vertex(2, 2)];

    let clamps = Clamp::all_on(&a)?;
    let reference = &clamps[0];
    println!("set {a:?}, reference clamp {}", reference.label());
    for c in &clamps {
        let r = excitation(&j, reference, c)?;
        println!(
            "  {:<4} ΔE = {:+.6}  interior {:+.6}  exterior {:+.6}",
            c.label(),
            r.delta_e,
            r.h_interior,
            r.delta_e_ext
        );
    }

    // Exterior differences add along a chain of clamps.
    let (e1, e2, e3) = (
        Clamp::new(&a, &[Plus, Plus, Plus])?,
        Clamp::new(&a, &[Plus, Minus, Plus])?,
        Clamp::new(&a, &[Plus, Minus, Minus])?,
    );
    let sum = excitation(&j, &e1, &e2)?.delta_e_ext + excitation(&j, &e2, &e3)?.delta_e_ext;
    let direct = excitation(&j, &e1, &e3)?.delta_e_ext;
    println!("chain {sum:+.12} vs direct {direct:+.12}");
    Ok(())
}
