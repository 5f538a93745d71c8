//! Finite-volume ground-state-pair check.
//!
//! A configuration is a ground-state pair of the box if no flip of a
//! connected vertex set lowers the energy, equivalently if the summed
//! `J_xy σ_x σ_y` over every dual circuit and every dual path between two
//! x-axis points is positive. Both families are checked up to a size bound.

use serde::{Deserialize, Serialize};

use super::SpinPair;
use crate::disorder::CouplingConfig;
use crate::error::Result;
use crate::lattice::{build_dual, cut_sides, for_each_connected_subset, for_each_dual_walk, EdgeId, VertexId};
use crate::numeric::CompensatedSum;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub max_subset_size: usize,
    pub max_dual_len: usize,
    /// Clamp set of a clamped state: only flips keeping its relative signs count.
    pub protected: Option<Vec<VertexId>>,
    pub cap: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            max_subset_size: 3,
            max_dual_len: 6,
            protected: None,
            cap: crate::lattice::DEFAULT_ENUMERATION_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetViolation {
    pub vertices: Vec<VertexId>,
    pub boundary_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkViolation {
    pub edges: Vec<EdgeId>,
    pub closed: bool,
    pub sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GspReport {
    pub subsets_checked: usize,
    pub walks_checked: usize,
    pub subset_violations: Vec<SubsetViolation>,
    pub walk_violations: Vec<WalkViolation>,
}

impl GspReport {
    pub fn passed(&self) -> bool {
        self.subset_violations.is_empty() && self.walk_violations.is_empty()
    }
}

pub fn verify_gsp(j: &CouplingConfig, state: &SpinPair, opts: &VerifyOptions) -> Result<GspReport> {
    let geom = j.geometry();
    let spins = state.spins();
    let bond = |e: EdgeId| {
        let edge = geom.edge(e);
        j.value(e) * f64::from(spins[edge.a] * spins[edge.b])
    };
    let mut protected = vec![false; geom.num_vertices()];
    if let Some(a) = &opts.protected {
        for &v in a {
            protected[v] = true;
        }
    }
    let clamped = opts.protected.is_some();

    let mut report = GspReport {
        subsets_checked: 0,
        walks_checked: 0,
        subset_violations: Vec::new(),
        walk_violations: Vec::new(),
    };

    let mut inside = vec![false; geom.num_vertices()];
    for_each_connected_subset(geom, opts.max_subset_size, opts.cap, |set| {
        if set.iter().any(|&v| protected[v]) {
            return;
        }
        set.iter().for_each(|&v| inside[v] = true);
        let mut sum = CompensatedSum::new();
        let mut any = false;
        for &v in set {
            for &e in geom.incident_edges(v) {
                if !inside[geom.edge(e).other(v)] {
                    sum.add(bond(e));
                    any = true;
                }
            }
        }
        set.iter().for_each(|&v| inside[v] = false);
        if !any {
            return;
        }
        report.subsets_checked += 1;
        if sum.value() <= 0.0 {
            let mut vertices = set.to_vec();
            vertices.sort_unstable();
            report.subset_violations.push(SubsetViolation {
                vertices,
                boundary_sum: sum.value(),
            });
        }
    })?;

    let dual = build_dual(geom);
    let protected_list = opts.protected.clone().unwrap_or_default();
    for_each_dual_walk(&dual, opts.max_dual_len, opts.cap, |walk| {
        if clamped && !protected_list.is_empty() {
            let Some(sides) = cut_sides(geom, &walk.edges) else {
                return;
            };
            let s0 = sides[protected_list[0]];
            if protected_list.iter().any(|&v| sides[v] != s0) {
                return;
            }
        }
        report.walks_checked += 1;
        let sum: CompensatedSum = walk.edges.iter().map(|&e| bond(e)).collect();
        if sum.value() <= 0.0 {
            report.walk_violations.push(WalkViolation {
                edges: walk.edges.clone(),
                closed: walk.closed,
                sum: sum.value(),
            });
        }
    })?;
    Ok(report)
}
