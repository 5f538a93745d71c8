//! Ground-state labels of two edges over a grid of their couplings, next to
//! the critical set predicted from the four exterior energies.

use std::sync::Arc;

use ea_lab::disorder::{sample_couplings, DistributionSpec};
use ea_lab::excitation::{consistency_check, label_grid, two_bond_critical_set};
use ea_lab::lattice::{square_box, EdgeKind};

fn main() -> ea_lab::Result<()> {
    let geom = Arc::new(square_box(2)?);
    let b = geom.edge_at(2, 2, EdgeKind::Horizontal).expect("edge");
    let e = geom.edge_at(3, 2, EdgeKind::Vertical).expect("edge");
    let j = sample_couplings(geom.clone(), &DistributionSpec::gaussian(1.0), 11, 3)?;

    let set = two_bond_critical_set(&j, b, e)?;
    println!("C1 {:+.6}  C2 {:+.6}  C3 {:+.6}  C4 {:+.6}  case {:?}", set.c1, set.c2, set.c3, set.c4, set.case);
    for s in &set.segments {
        println!(
            "  {:?}: J_b in {:?}, J_e in {:?}, separates {} | {}",
            s.kind,
            s.jb,
            s.je,
            s.separates[0].symbol(),
            s.separates[1].symbol()
        );
    }

    // Rows are J_e from top to bottom, columns J_b from left to right.
    let (xs, ys) = set.grid_axes(31);
    let labels = label_grid(&j, b, e, &xs, &ys)?;
    let glyph = |s: &str| match s {
        "++" => 'A',
        "+-" => 'B',
        "-+" => 'C',
        _ => 'D',
    };
    for (c, _) in ys.iter().enumerate().rev() {
        let line: String = (0..xs.len()).map(|a| glyph(&labels[a][c].symbol())).collect();
        println!("  {line}");
    }
    println!("  A = ++, B = +-, C = -+, D = -- (signs of b, e)");

    let report = consistency_check(&j, b, e)?;
    println!("piecewise critical values: max error {:e}", report.max_error);
    Ok(())
}
