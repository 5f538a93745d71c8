//! Writing a coupling realization to CSV and reading it back.

use std::sync::Arc;

use ea_lab::disorder::{sample_couplings, CouplingConfig, DistributionSpec};
use ea_lab::lattice::square_box;
use ea_lab::solver::solve;

fn main() -> ea_lab::Result<()> {
    let geom = Arc::new(square_box(1)?);
    let j = sample_couplings(geom.clone(), &DistributionSpec::uniform_symmetric(1.0), 99, 4)?;

    let mut buf = Vec::new();
    j.write_csv(&mut buf)?;
    print!("{}", String::from_utf8_lossy(&buf));

    let back = CouplingConfig::read_csv(geom, buf.as_slice())?;
    assert_eq!(back.values(), j.values());
    println!("round trip ok, ground-state energy {:.6}", solve(&back, None)?.energy());
    Ok(())
}
