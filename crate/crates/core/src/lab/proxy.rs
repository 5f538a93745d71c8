//! Finite-volume sources of configuration pairs whose interfaces feed the
//! wall statistics.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::{ProxyKind, WindowSpec};
use crate::disorder::{derived_seed, sample_couplings, CouplingConfig, DistributionSpec};
use crate::error::{Error, Result};
use crate::excitation::bond_excitation;
use crate::interface::{interface, Interface};
use crate::lattice::{build_box, build_dual, BoxGeometry, DualGeometry, EdgeId, EdgeKey};
use crate::solver::{solve, SpinPair};

/// Purpose tag for the resampled copy of the couplings.
const RESAMPLE_PURPOSE: u64 = 0xc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProxyParams {
    pub kind: ProxyKind,
    pub edge: EdgeId,
    pub window: WindowSpec,
}

#[derive(Debug, Clone)]
pub struct PairSample {
    pub kind: ProxyKind,
    pub couplings: CouplingConfig,
    pub dual: DualGeometry,
    pub interface: Interface,
    /// Critical value of the probed edge (critical-contour proxy only).
    pub critical_value: Option<f64>,
}

/// Non-wrap edges of `geom` with both endpoints in the window.
pub fn window_edges(geom: &BoxGeometry, window: &WindowSpec) -> Result<Vec<EdgeId>> {
    let x0 = -(((window.width.max(1) - 1) / 2) as i64);
    let x1 = x0 + window.width as i64 - 1;
    let inside = |v: usize| {
        let (c, r) = geom.coords(v);
        let x = geom.abs_column(c);
        r < window.height && x0 <= x && x <= x1
    };
    let edges: Vec<EdgeId> = (0..geom.num_edges())
        .filter(|&e| {
            let edge = geom.edge(e);
            !edge.wrap && inside(edge.a) && inside(edge.b)
        })
        .collect();
    let expected_vertices = (x0..=x1).filter(|&x| geom.column_of(x).is_some()).count() * window.height.min(geom.height());
    if window.height > geom.height() || expected_vertices != window.width * window.height {
        return Err(Error::Geometry(format!(
            "window {}x{} does not fit in a {}x{} box",
            window.width,
            window.height,
            geom.width(),
            geom.height()
        )));
    }
    Ok(edges)
}

/// Edge keys of the window, in a box-independent order.
pub fn window_keys(geom: &BoxGeometry, window: &WindowSpec) -> Result<Vec<EdgeKey>> {
    let mut keys: Vec<EdgeKey> = window_edges(geom, window)?.into_iter().map(|e| geom.edge_key(e)).collect();
    keys.sort_by_key(|k| match *k {
        EdgeKey::Plain { x1, y1, x2, y2 } => (y1, x1, y2, x2),
        EdgeKey::Wrap { .. } => unreachable!("windows hold no wrap edges"),
    });
    Ok(keys)
}

fn satisfied(j: f64, product: i8) -> bool {
    j * f64::from(product) > 0.0
}

fn product(geom: &BoxGeometry, s: &SpinPair, e: EdgeId) -> i8 {
    let edge = geom.edge(e);
    s.spin(edge.a) * s.spin(edge.b)
}

/// Builds one configuration pair for sample `index` and returns its interface
/// on the main box's dual lattice.
pub fn pair_sample(
    geom: &Arc<BoxGeometry>,
    dist: &DistributionSpec,
    seed: u64,
    index: u64,
    params: &ProxyParams,
) -> Result<PairSample> {
    let j = sample_couplings(geom.clone(), dist, seed, index)?;
    pair_for(j, dist, seed, index, params)
}

/// Like [`pair_sample`] with given couplings on the main box. The inner box
/// of the nested proxy sees their restriction; the resampled proxy redraws
/// the edges outside the window from the sample's stream.
pub fn pair_for(
    j: CouplingConfig,
    dist: &DistributionSpec,
    seed: u64,
    index: u64,
    params: &ProxyParams,
) -> Result<PairSample> {
    let geom = &j.geometry().clone();
    let dual = build_dual(geom);
    match params.kind {
        ProxyKind::CriticalContour => {
            let x = bond_excitation(&j, params.edge)?;
            let c = x.critical_value;
            let at_c = j.with_value(params.edge, c)?;
            let interface = interface(&at_c, &dual, &x.plus, &x.minus).with_sources("+b", "-b");
            Ok(PairSample {
                kind: params.kind,
                couplings: at_c,
                dual,
                interface,
                critical_value: Some(c),
            })
        }
        ProxyKind::NestedVolumes => {
            let inner = Arc::new(build_box(geom.width() - 2, geom.height() - 1)?);
            // Shared edges carry the main box's (possibly modified) values; the
            // inner wrap edges keep their own draws.
            let drawn = sample_couplings(inner.clone(), dist, seed, index)?;
            let shared: Vec<(EdgeId, f64)> = (0..inner.num_edges())
                .filter_map(|f| geom.edge_by_key(inner.edge_key(f)).map(|e| (f, j.value(e))))
                .collect();
            let j_inner = drawn.with_values(&shared)?;
            let outer = solve(&j, None)?;
            let inner_state = solve(&j_inner, None)?;
            let mut edges = Vec::new();
            for e in window_edges(geom, &params.window)? {
                let f = inner.edge_by_key(geom.edge_key(e)).ok_or_else(|| {
                    Error::Geometry("window reaches outside the inner box".into())
                })?;
                debug_assert_eq!(j.value(e), j_inner.value(f));
                if satisfied(j.value(e), product(geom, &outer, e)) != satisfied(j.value(e), product(&inner, &inner_state, f)) {
                    edges.push(e);
                }
            }
            Ok(PairSample {
                kind: params.kind,
                interface: Interface::from_edges(&dual, edges).with_sources("box", "inner box"),
                couplings: j,
                dual,
                critical_value: None,
            })
        }
        ProxyKind::Resampled => {
            let window = window_edges(geom, &params.window)?;
            let fresh = sample_couplings(geom.clone(), dist, derived_seed(seed, RESAMPLE_PURPOSE), index)?;
            let changes: Vec<(EdgeId, f64)> = (0..geom.num_edges())
                .filter(|e| window.binary_search(e).is_err())
                .map(|e| (e, fresh.value(e)))
                .collect();
            let perturbed = j.with_values(&changes)?;
            let a = solve(&j, None)?;
            let b = solve(&perturbed, None)?;
            let edges = window
                .into_iter()
                .filter(|&e| satisfied(j.value(e), product(geom, &a, e)) != satisfied(j.value(e), product(geom, &b, e)))
                .collect();
            Ok(PairSample {
                kind: params.kind,
                interface: Interface::from_edges(&dual, edges).with_sources("original", "resampled outside window"),
                couplings: j,
                dual,
                critical_value: None,
            })
        }
    }
}
