//! Exhaustive enumeration, used as the reference oracle on small boxes.

use super::{check_clamp, energy, Clamp, SpinPair};
use crate::disorder::CouplingConfig;
use crate::error::{Error, Result};
use crate::numeric::energy_tolerance;

pub const MAX_BRUTE_FORCE_VERTICES: usize = 24;

/// Gray-code enumeration of all canonical configurations (vertex 0 at `+1`).
///
/// Energies are updated incrementally during the sweep; every configuration
/// within a loose slack of the running optimum is kept and re-evaluated with
/// the compensated [`energy`] before the tie rule is applied.
pub fn brute_force(j: &CouplingConfig, clamp: Option<&Clamp>) -> Result<SpinPair> {
    let geom = j.geometry();
    let n = geom.num_vertices();
    if n > MAX_BRUTE_FORCE_VERTICES {
        return Err(Error::EnumerationBudget {
            cap: MAX_BRUTE_FORCE_VERTICES,
        });
    }
    check_clamp(geom, clamp)?;

    // Bit v set means spin -1 at vertex v.
    let (amask, aval) = match clamp {
        Some(c) => c.vertices().iter().zip(c.signs()).fold((0u32, 0u32), |(m, val), (&v, s)| {
            (m | 1 << v, if s.to_i8() < 0 { val | 1 << v } else { val })
        }),
        None => (0, 0),
    };
    let admissible = |bits: u32| {
        let on = bits & amask;
        on == aval || on == aval ^ amask
    };

    let incident: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|v| {
            geom.incident_edges(v)
                .iter()
                .map(|&e| (geom.edge(e).other(v), j.value(e)))
                .collect()
        })
        .collect();

    let mut spins = vec![1i8; n];
    let mut bits = 0u32;
    let mut e = energy(j, &spins);
    let mut best = f64::INFINITY;
    let mut keep: Vec<u32> = Vec::new();
    let slack = |b: f64| 1e-9 * (1.0 + b.abs());

    let steps: u64 = 1 << (n - 1);
    for step in 0..steps {
        if step > 0 {
            let v = 1 + step.trailing_zeros() as usize;
            let sv = f64::from(spins[v]);
            let delta: f64 = incident[v].iter().map(|&(u, jv)| 2.0 * jv * sv * f64::from(spins[u])).sum();
            e += delta;
            spins[v] = -spins[v];
            bits ^= 1 << v;
        }
        if !admissible(bits) {
            continue;
        }
        if e < best {
            best = e;
            if keep.len() > 64 {
                let cut = best + slack(best);
                keep.retain(|&b| config_energy(j, b, n) <= cut);
            }
        }
        if e <= best + slack(best) {
            keep.push(bits);
        }
    }

    let exact: Vec<(u32, f64)> = keep.into_iter().map(|b| (b, config_energy(j, b, n))).collect();
    let emin = exact.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    if !emin.is_finite() {
        return Err(Error::Clamp("clamp admits no configuration".into()));
    }
    let threshold = emin + energy_tolerance(emin);
    let optimal: Vec<u32> = exact.iter().filter(|x| x.1 <= threshold).map(|x| x.0).collect();
    // Lexicographic order by vertex id, `+` before `-`.
    let chosen = optimal
        .iter()
        .copied()
        .min_by_key(|b| b.reverse_bits())
        .expect("at least one optimum");
    Ok(SpinPair::from_canonical(j, to_spins(chosen, n), optimal.len() > 1))
}

fn to_spins(bits: u32, n: usize) -> Vec<i8> {
    (0..n).map(|v| if bits >> v & 1 == 1 { -1 } else { 1 }).collect()
}

fn config_energy(j: &CouplingConfig, bits: u32, n: usize) -> f64 {
    energy(j, &to_spins(bits, n))
}
