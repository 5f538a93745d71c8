//! Exact ground states and clamped (excited) states.
//!
//! Configurations are always stored modulo the global flip in canonical
//! form: vertex 0 carries spin `+1`. When several configurations share the
//! optimal energy (within [`energy_tolerance`](crate::numeric::energy_tolerance)),
//! the lexicographically smallest canonical pattern wins, reading vertices
//! in id order with `+1 < -1`, and the result is flagged as a tie.

mod brute;
mod transfer;
mod verify;

use serde::{Deserialize, Serialize};

pub use brute::{brute_force, MAX_BRUTE_FORCE_VERTICES};
pub use transfer::solve_with;
pub use verify::{verify_gsp, GspReport, SubsetViolation, VerifyOptions, WalkViolation};

use crate::disorder::CouplingConfig;
use crate::error::{Error, Result};
use crate::lattice::{BoxGeometry, EdgeId, VertexId};
use crate::numeric::CompensatedSum;
use crate::Sign;

/// Largest box width the transfer-matrix solver accepts by default.
pub const DEFAULT_MAX_WIDTH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    pub max_width: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_width: DEFAULT_MAX_WIDTH,
        }
    }
}

/// A spin configuration modulo global flip, in canonical form, with its energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinPair {
    spins: Vec<i8>,
    energy: f64,
    tie: bool,
}

impl SpinPair {
    /// Canonicalizes `spins` and evaluates its energy under `j`.
    pub fn from_spins(j: &CouplingConfig, mut spins: Vec<i8>) -> Result<Self> {
        if spins.len() != j.geometry().num_vertices() {
            return Err(Error::InvalidArgument(format!(
                "expected {} spins, got {}",
                j.geometry().num_vertices(),
                spins.len()
            )));
        }
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument("spins must be +1 or -1".into()));
        }
        if spins[0] < 0 {
            spins.iter_mut().for_each(|s| *s = -*s);
        }
        let energy = energy(j, &spins);
        Ok(Self {
            spins,
            energy,
            tie: false,
        })
    }

    pub(crate) fn from_canonical(j: &CouplingConfig, spins: Vec<i8>, tie: bool) -> Self {
        debug_assert_eq!(spins[0], 1);
        let energy = energy(j, &spins);
        Self { spins, energy, tie }
    }

    pub(crate) fn marked_tie(mut self) -> Self {
        self.tie = true;
        self
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn spin(&self, v: VertexId) -> i8 {
        self.spins[v]
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Whether another configuration attained the same optimal energy.
    pub fn tie(&self) -> bool {
        self.tie
    }

    pub fn is_canonical(&self) -> bool {
        self.spins[0] == 1
    }

    /// `σ_u σ_v`.
    pub fn product(&self, u: VertexId, v: VertexId) -> Sign {
        Sign::from_i8(self.spins[u] * self.spins[v])
    }

    /// Relative sign across an edge.
    pub fn edge_sign(&self, geom: &BoxGeometry, e: EdgeId) -> Sign {
        let edge = geom.edge(e);
        self.product(edge.a, edge.b)
    }

    /// Whether `J_e σ_a σ_b > 0`.
    pub fn satisfies(&self, j: &CouplingConfig, e: EdgeId) -> bool {
        let edge = j.geometry().edge(e);
        j.value(e) * f64::from(self.spins[edge.a] * self.spins[edge.b]) > 0.0
    }

    /// Same configuration up to global flip (ignores energy and tie flag).
    pub fn same_state(&self, other: &SpinPair) -> bool {
        self.spins == other.spins
    }

    pub fn pattern(&self) -> String {
        self.spins.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
    }
}

/// Relative signs on a vertex set `A`, modulo global flip. Stored with
/// vertices sorted and the lowest vertex carrying `+`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clamp {
    vertices: Vec<VertexId>,
    signs: Vec<Sign>,
}

impl Clamp {
    pub fn new(vertices: &[VertexId], signs: &[Sign]) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Clamp("clamp set must be non-empty".into()));
        }
        if vertices.len() != signs.len() {
            return Err(Error::Clamp("one sign per clamped vertex".into()));
        }
        let mut pairs: Vec<(VertexId, Sign)> = vertices.iter().copied().zip(signs.iter().copied()).collect();
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Clamp("repeated vertex in clamp".into()));
        }
        let reference = pairs[0].1;
        Ok(Self {
            vertices: pairs.iter().map(|p| p.0).collect(),
            signs: pairs.iter().map(|p| p.1 * reference).collect(),
        })
    }

    /// `±_b`: the endpoints of `b` with equal (`Plus`) or opposite (`Minus`) spins.
    pub fn edge(geom: &BoxGeometry, b: EdgeId, relative: Sign) -> Self {
        let e = geom.edge(b);
        Self::new(&[e.a, e.b], &[Sign::Plus, relative]).expect("edge endpoints are distinct")
    }

    /// Restriction of a configuration to `vertices`.
    pub fn from_state(state: &SpinPair, vertices: &[VertexId]) -> Result<Self> {
        let signs: Vec<Sign> = vertices.iter().map(|&v| Sign::from_i8(state.spin(v))).collect();
        Self::new(vertices, &signs)
    }

    /// All `2^(|A|-1)` clamps on `vertices`, in a fixed order.
    pub fn all_on(vertices: &[VertexId]) -> Result<Vec<Self>> {
        if vertices.is_empty() || vertices.len() > 20 {
            return Err(Error::Clamp(format!("cannot enumerate clamps on {} vertices", vertices.len())));
        }
        let mut sorted = vertices.to_vec();
        sorted.sort_unstable();
        let k = sorted.len();
        (0..1u32 << (k - 1))
            .map(|bits| {
                let signs: Vec<Sign> = (0..k)
                    .map(|i| if i > 0 && bits >> (i - 1) & 1 == 1 { Sign::Minus } else { Sign::Plus })
                    .collect();
                Self::new(&sorted, &signs)
            })
            .collect()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn sign_of(&self, v: VertexId) -> Option<Sign> {
        self.vertices.binary_search(&v).ok().map(|i| self.signs[i])
    }

    /// Whether `state` restricted to the clamp set equals the clamp modulo flip.
    pub fn is_satisfied_by(&self, state: &SpinPair) -> bool {
        let reference = Sign::from_i8(state.spin(self.vertices[0]));
        self.vertices
            .iter()
            .zip(&self.signs)
            .all(|(&v, &s)| Sign::from_i8(state.spin(v)) == s * reference)
    }

    pub fn label(&self) -> String {
        self.signs.iter().map(|s| s.symbol()).collect()
    }
}

/// `-Σ_{<x,y>} J_xy σ_x σ_y`, summed with compensation.
pub fn energy(j: &CouplingConfig, spins: &[i8]) -> f64 {
    j.geometry()
        .edges()
        .iter()
        .zip(j.values())
        .map(|(e, &v)| -v * f64::from(spins[e.a] * spins[e.b]))
        .collect::<CompensatedSum>()
        .value()
}

/// Energy restricted to the given edges.
pub fn partial_energy(j: &CouplingConfig, spins: &[i8], edges: impl IntoIterator<Item = EdgeId>) -> f64 {
    let geom = j.geometry();
    edges
        .into_iter()
        .map(|e| {
            let edge = geom.edge(e);
            -j.value(e) * f64::from(spins[edge.a] * spins[edge.b])
        })
        .collect::<CompensatedSum>()
        .value()
}

/// Exact minimizer modulo flip, optionally subject to a clamp.
pub fn solve(j: &CouplingConfig, clamp: Option<&Clamp>) -> Result<SpinPair> {
    solve_with(j, clamp, &SolverOptions::default())
}

pub(crate) fn check_clamp(geom: &BoxGeometry, clamp: Option<&Clamp>) -> Result<()> {
    if let Some(c) = clamp {
        if let Some(&v) = c.vertices().iter().find(|&&v| v >= geom.num_vertices()) {
            return Err(Error::Clamp(format!("vertex {v} outside the box")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::{sample_couplings, DistributionSpec};
    use crate::lattice::{build_box, EdgeKind};
    use std::sync::Arc;

    #[test]
    fn energy_examples() {
        let g = Arc::new(build_box(1, 2).unwrap());
        let j = CouplingConfig::uniform(g, 1.5).unwrap();
        assert_eq!(energy(&j, &[1, 1]), -1.5);

        let g = Arc::new(build_box(3, 3).unwrap());
        let j = CouplingConfig::uniform(g.clone(), 1.0).unwrap();
        assert_eq!(energy(&j, &[1; 9]), -15.0);

        let j = sample_couplings(g, &DistributionSpec::gaussian(1.0), 4, 0).unwrap();
        let s: Vec<i8> = (0..9).map(|i| if i % 3 == 0 { -1 } else { 1 }).collect();
        let flipped: Vec<i8> = s.iter().map(|x| -x).collect();
        assert_eq!(energy(&j, &s), energy(&j, &flipped));
    }

    #[test]
    fn canonical_form_is_flip_invariant() {
        let g = Arc::new(build_box(3, 2).unwrap());
        let j = sample_couplings(g, &DistributionSpec::gaussian(1.0), 4, 1).unwrap();
        let s = vec![-1, 1, 1, -1, 1, -1];
        let a = SpinPair::from_spins(&j, s.clone()).unwrap();
        let b = SpinPair::from_spins(&j, s.iter().map(|x| -x).collect()).unwrap();
        assert_eq!(a, b);
        assert!(a.is_canonical());
        let again = SpinPair::from_spins(&j, a.spins().to_vec()).unwrap();
        assert_eq!(again, a);
    }

    #[test]
    fn clamp_normalization() {
        let c = Clamp::new(&[5, 2], &[Sign::Plus, Sign::Minus]).unwrap();
        assert_eq!(c.vertices(), &[2, 5]);
        assert_eq!(c.signs(), &[Sign::Plus, Sign::Minus]);
        let d = Clamp::new(&[2, 5], &[Sign::Minus, Sign::Plus]).unwrap();
        assert_eq!(c, d);
        assert!(Clamp::new(&[], &[]).is_err());
        assert!(Clamp::new(&[1, 1], &[Sign::Plus, Sign::Plus]).is_err());
        assert_eq!(Clamp::all_on(&[4, 1, 7]).unwrap().len(), 4);
    }

    #[test]
    fn single_edge_ground_state() {
        let g = Arc::new(build_box(1, 2).unwrap());
        let j = CouplingConfig::uniform(g, -2.0).unwrap();
        let s = solve(&j, None).unwrap();
        assert_eq!(s.spins(), &[1, -1]);
        assert_eq!(s.energy(), -2.0);
        assert!(!s.tie());
        let b = brute_force(&j, None).unwrap();
        assert_eq!(b, s);
    }

    #[test]
    fn ferromagnet_with_opposite_clamp() {
        // Optimum -7 (exhaustive check): flip one of the two endpoints, four
        // broken bonds; either endpoint works, hence the tie.
        let g = Arc::new(build_box(3, 3).unwrap());
        let j = CouplingConfig::uniform(g.clone(), 1.0).unwrap();
        let b = g.edge_at(0, 1, EdgeKind::Horizontal).unwrap();
        let clamp = Clamp::edge(&g, b, Sign::Minus);
        let s = solve(&j, Some(&clamp)).unwrap();
        let o = brute_force(&j, Some(&clamp)).unwrap();
        assert_eq!(s, o);
        assert_eq!(s.energy(), -7.0);
        assert!(clamp.is_satisfied_by(&s));
        assert!(s.tie());
    }

    #[test]
    fn width_budget_enforced() {
        let g = Arc::new(build_box(17, 2).unwrap());
        let j = CouplingConfig::uniform(g, 1.0).unwrap();
        assert!(matches!(solve(&j, None), Err(Error::SolverBudget(_))));
        let opts = SolverOptions { max_width: 17 };
        assert!(solve_with(&j, None, &opts).is_ok());
    }

    #[test]
    fn clamp_outside_box_rejected() {
        let g = Arc::new(build_box(2, 2).unwrap());
        let j = CouplingConfig::uniform(g, 1.0).unwrap();
        let c = Clamp::new(&[0, 9], &[Sign::Plus, Sign::Plus]).unwrap();
        assert!(matches!(solve(&j, Some(&c)), Err(Error::Clamp(_))));
        assert!(matches!(brute_force(&j, Some(&c)), Err(Error::Clamp(_))));
    }
}
