//! Excitation energies, critical values and critical contours.
//!
//! For a clamp set `A`, the interior energy sums the couplings with both
//! endpoints in `A`; everything else is exterior. Exterior energies are
//! summed directly over exterior edges, so they carry no rounding from
//! interior couplings and are exactly independent of them.

mod two_bond;

use serde::{Deserialize, Serialize};

pub use two_bond::{
    consistency_check, label_grid, two_bond_critical_set, CaseKind, ConsistencyEntry, ConsistencyReport, CriticalSet2, Interval,
    Label, Segment, SegmentKind,
};

use crate::disorder::CouplingConfig;
use crate::error::{Error, Result};
use crate::interface::{interface, Interface};
use crate::lattice::{DualGeometry, EdgeId, VertexId};
use crate::numeric::energy_tolerance;
use crate::solver::{partial_energy, solve, Clamp, SpinPair};
use crate::Sign;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitationRecord {
    pub vertices: Vec<VertexId>,
    pub eta: Clamp,
    pub eta_prime: Clamp,
    pub state: SpinPair,
    pub state_prime: SpinPair,
    pub delta_e: f64,
    pub h_interior: f64,
    pub delta_e_ext: f64,
}

/// Energy of `spins` on edges not listed in `interior` (sorted).
pub fn exterior_energy(j: &CouplingConfig, spins: &[i8], interior: &[EdgeId]) -> f64 {
    partial_energy(
        j,
        spins,
        (0..j.geometry().num_edges()).filter(|e| interior.binary_search(e).is_err()),
    )
}

/// `ΔE`, `h` and `ΔE^ext` between the excited states for two clamps on the same set.
pub fn excitation(j: &CouplingConfig, eta: &Clamp, eta_prime: &Clamp) -> Result<ExcitationRecord> {
    if eta.vertices() != eta_prime.vertices() {
        return Err(Error::Clamp("both clamps must live on the same vertex set".into()));
    }
    let state = solve(j, Some(eta))?;
    let state_prime = solve(j, Some(eta_prime))?;
    let interior = j.interior_edges(eta.vertices());
    let h_interior = partial_energy(j, state.spins(), interior.iter().copied())
        - partial_energy(j, state_prime.spins(), interior.iter().copied());
    let delta_e_ext = exterior_energy(j, state.spins(), &interior) - exterior_energy(j, state_prime.spins(), &interior);
    Ok(ExcitationRecord {
        vertices: eta.vertices().to_vec(),
        eta: eta.clone(),
        eta_prime: eta_prime.clone(),
        delta_e: state.energy() - state_prime.energy(),
        state,
        state_prime,
        h_interior,
        delta_e_ext,
    })
}

/// Minimizer subject to prescribed relative signs across a few edges.
///
/// The endpoints of the edges form the set `A`; every full clamp on `A`
/// compatible with the edge signs is solved and the lowest energy wins,
/// ties going to the lexicographically smaller configuration.
pub fn solve_with_edge_signs(j: &CouplingConfig, constraints: &[(EdgeId, Sign)]) -> Result<SpinPair> {
    let geom = j.geometry();
    if constraints.is_empty() {
        return solve(j, None);
    }
    if let Some(&(e, _)) = constraints.iter().find(|c| c.0 >= geom.num_edges()) {
        return Err(Error::InvalidArgument(format!("edge {e} not in geometry")));
    }
    let mut vertices: Vec<VertexId> = constraints.iter().flat_map(|&(e, _)| geom.edge(e).endpoints()).collect();
    vertices.sort_unstable();
    vertices.dedup();
    let compatible: Vec<Clamp> = Clamp::all_on(&vertices)?
        .into_iter()
        .filter(|c| {
            constraints.iter().all(|&(e, s)| {
                let edge = geom.edge(e);
                c.sign_of(edge.a).unwrap() * c.sign_of(edge.b).unwrap() == s
            })
        })
        .collect();
    if compatible.is_empty() {
        return Err(Error::Clamp("edge signs are inconsistent".into()));
    }
    let states = compatible
        .iter()
        .map(|c| solve(j, Some(c)))
        .collect::<Result<Vec<_>>>()?;
    let emin = states.iter().map(|s| s.energy()).fold(f64::INFINITY, f64::min);
    let threshold = emin + energy_tolerance(emin);
    let optimal: Vec<&SpinPair> = states.iter().filter(|s| s.energy() <= threshold).collect();
    let tie = optimal.len() > 1 || optimal.iter().any(|s| s.tie());
    let best = optimal
        .into_iter()
        .min_by(|a, b| lex_key(a).cmp(&lex_key(b)))
        .expect("non-empty");
    let mut out = SpinPair::from_spins(j, best.spins().to_vec())?;
    if tie {
        out = out.marked_tie();
    }
    Ok(out)
}

/// Lexicographic key with `+` before `-`.
fn lex_key(s: &SpinPair) -> Vec<i8> {
    s.spins().iter().map(|&x| -x).collect()
}

/// `α^{±_b}`.
pub fn bond_excited_state(j: &CouplingConfig, b: EdgeId, sign: Sign) -> Result<SpinPair> {
    if b >= j.geometry().num_edges() {
        return Err(Error::InvalidArgument(format!("edge {b} not in geometry")));
    }
    solve(j, Some(&Clamp::edge(j.geometry(), b, sign)))
}

/// Both excited states of `b` and the critical value they determine.
#[derive(Debug, Clone)]
pub struct BondExcitation {
    pub plus: SpinPair,
    pub minus: SpinPair,
    pub critical_value: f64,
}

pub fn bond_excitation(j: &CouplingConfig, b: EdgeId) -> Result<BondExcitation> {
    let plus = bond_excited_state(j, b, Sign::Plus)?;
    let minus = bond_excited_state(j, b, Sign::Minus)?;
    let critical_value = 0.5 * (exterior_energy(j, plus.spins(), &[b]) - exterior_energy(j, minus.spins(), &[b]));
    Ok(BondExcitation {
        plus,
        minus,
        critical_value,
    })
}

/// `½ ΔE^ext(+_b, -_b)`: the value of `J_b` at which the ground state
/// switches between the two excited states of `b`.
pub fn critical_value(j: &CouplingConfig, b: EdgeId) -> Result<f64> {
    Ok(bond_excitation(j, b)?.critical_value)
}

/// Sign of `σ_x σ_y` across `b` in the ground state.
pub fn ground_state_label(j: &CouplingConfig, b: EdgeId) -> Result<Sign> {
    Ok(solve(j, None)?.edge_sign(j.geometry(), b))
}

/// Certified enclosure of the flip point of `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlipInterval {
    /// Largest probed `J_b` with ground-state label `-`.
    pub lo: f64,
    /// Smallest probed `J_b` with ground-state label `+`.
    pub hi: f64,
    pub iterations: usize,
}

impl FlipInterval {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

pub const BISECTION_ITERATIONS: usize = 60;

/// Brackets the label change of `b` by doubling, then bisects
/// [`BISECTION_ITERATIONS`] times. Uses only unclamped ground states.
pub fn locate_flip_point(j: &CouplingConfig, b: EdgeId) -> Result<FlipInterval> {
    let label = |x: f64| ground_state_label(&j.with_value(b, x)?, b);
    let mut hi = 1.0;
    while label(hi)? != Sign::Plus {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::InvalidArgument("no upper bracket for flip point".into()));
        }
    }
    let mut lo = -1.0;
    while label(lo)? != Sign::Minus {
        lo *= 2.0;
        if lo < -1e12 {
            return Err(Error::InvalidArgument("no lower bracket for flip point".into()));
        }
    }
    let mut iterations = 0;
    for _ in 0..BISECTION_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if label(mid)? == Sign::Plus {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(FlipInterval { lo, hi, iterations })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipCensus {
    pub edge: EdgeId,
    pub values: Vec<f64>,
    pub labels: Vec<Sign>,
    /// Indices `i` with `labels[i] != labels[i + 1]`.
    pub transitions: Vec<usize>,
}

/// Ground-state label of `b` at each grid value of `J_b`.
pub fn flip_census(j: &CouplingConfig, b: EdgeId, grid: &[f64]) -> Result<FlipCensus> {
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("grid must be finite and sorted".into()));
    }
    let labels = grid
        .iter()
        .map(|&x| ground_state_label(&j.with_value(b, x)?, b))
        .collect::<Result<Vec<_>>>()?;
    let transitions = labels
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != w[1])
        .map(|(i, _)| i)
        .collect();
    Ok(FlipCensus {
        edge: b,
        values: grid.to_vec(),
        labels,
        transitions,
    })
}

/// Interface between `α^{+_b}` and `α^{-_b}`.
pub fn critical_contour(j: &CouplingConfig, dual: &DualGeometry, b: EdgeId) -> Result<Interface> {
    let plus = bond_excited_state(j, b, Sign::Plus)?;
    let minus = bond_excited_state(j, b, Sign::Minus)?;
    Ok(interface(j, dual, &plus, &minus).with_sources("+b", "-b"))
}
