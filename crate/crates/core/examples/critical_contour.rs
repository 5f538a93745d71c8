//! Critical contour of the central edge, its domain walls, and a CSV dump of
//! the walls on the dual lattice.

use std::sync::Arc;

use ea_lab::disorder::{sample_couplings, DistributionSpec};
use ea_lab::excitation::critical_contour;
use ea_lab::interface::{domain_walls, no_double_tether_check, write_walls_csv};
use ea_lab::lab::EdgeSpec;
use ea_lab::lattice::{build_dual, square_box};

fn main() -> ea_lab::Result<()> {
    let geom = Arc::new(square_box(4)?);
    let dual = build_dual(&geom);
    let b = EdgeSpec::central(&geom).resolve(&geom)?;

    for index in 0..5 {
        let j = sample_couplings(geom.clone(), &DistributionSpec::gaussian(1.0), 3, index)?;
        let contour = critical_contour(&j, &dual, b)?;
        let walls = domain_walls(&contour, &dual);
        let tether = no_double_tether_check(&walls, &dual);
        println!(
            "sample {index}: {} dual edges, {} walls, {} tethered, x-axis to x-axis paths: {}",
            contour.len(),
            walls.len(),
            walls.iter().filter(|w| w.tethered).count(),
            tether.double_tethers.len()
        );
        if index == 0 {
            write_walls_csv(&walls, &dual, std::io::stdout())?;
        }
    }
    Ok(())
}
