//! Interfaces between two configurations and their domain walls.
//!
//! Dual edges share ids with their primal edges. Two dual edges are in the
//! same wall when they share a dual vertex; walls may wrap around the
//! cylinder. A wall is tethered when it touches the dual x-axis.

use std::collections::btree_map::Entry;
use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::disorder::CouplingConfig;
use crate::error::{Error, Result};
use crate::lattice::{BoxGeometry, DualGeometry, DualVertexId, EdgeId};
use crate::solver::SpinPair;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interface {
    /// Dual edge ids, sorted.
    pub edges: Vec<EdgeId>,
    /// Endpoints of those dual edges, sorted.
    pub vertices: Vec<DualVertexId>,
    /// Labels of the two source configurations.
    pub sources: [String; 2],
}

impl Interface {
    pub fn from_edges(dual: &DualGeometry, mut edges: Vec<EdgeId>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        let mut vertices: Vec<DualVertexId> = edges.iter().flat_map(|&e| dual.endpoints(e)).collect();
        vertices.sort_unstable();
        vertices.dedup();
        Self {
            edges,
            vertices,
            sources: ["a".into(), "b".into()],
        }
    }

    pub fn with_sources(mut self, a: &str, b: &str) -> Self {
        self.sources = [a.into(), b.into()];
        self
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.binary_search(&e).is_ok()
    }
}

/// Dual edges whose coupling is satisfied in exactly one of `a`, `b`.
pub fn interface(j: &CouplingConfig, dual: &DualGeometry, a: &SpinPair, b: &SpinPair) -> Interface {
    let edges = (0..j.geometry().num_edges())
        .filter(|&e| a.satisfies(j, e) != b.satisfies(j, e))
        .collect();
    Interface::from_edges(dual, edges)
}

/// Interface restricted to a subset of edges (used for window comparisons).
pub fn restrict(iface: &Interface, dual: &DualGeometry, keep: impl Fn(EdgeId) -> bool) -> Interface {
    let edges = iface.edges.iter().copied().filter(|&e| keep(e)).collect();
    Interface::from_edges(dual, edges).with_sources(&iface.sources[0], &iface.sources[1])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainWall {
    pub edges: Vec<EdgeId>,
    pub vertices: Vec<DualVertexId>,
    pub tethered: bool,
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Connected components of the interface, ordered by smallest edge id.
pub fn domain_walls(iface: &Interface, dual: &DualGeometry) -> Vec<DomainWall> {
    let mut uf = UnionFind::new(dual.num_vertices());
    for &e in &iface.edges {
        let [u, v] = dual.endpoints(e);
        uf.union(u, v);
    }
    let mut walls: Vec<DomainWall> = Vec::new();
    let mut slot = vec![usize::MAX; dual.num_vertices()];
    for &e in &iface.edges {
        let root = uf.find(dual.endpoints(e)[0]);
        if slot[root] == usize::MAX {
            slot[root] = walls.len();
            walls.push(DomainWall {
                edges: Vec::new(),
                vertices: Vec::new(),
                tethered: false,
            });
        }
        walls[slot[root]].edges.push(e);
    }
    for &v in &iface.vertices {
        let wall = &mut walls[slot[uf.find(v)]];
        wall.vertices.push(v);
        wall.tethered |= dual.is_x_axis(v);
    }
    walls
}

/// Largest `n` for which `I_{n,k}` fits inside the box.
pub fn max_segment_half_width(geom: &BoxGeometry) -> usize {
    let lo = -geom.x_offset();
    let hi = geom.x_offset() + geom.width() as i64;
    lo.min(hi).max(0) as usize
}

/// Whether dual vertex `v` lies on `I_{n,k}`: dual row `k`, absolute
/// position `a + 1/2` with `a` in `[-n, n-1]`.
pub fn on_segment(geom: &BoxGeometry, dual: &DualGeometry, v: DualVertexId, n: usize, k: usize) -> bool {
    let (c, r) = dual.coords(v);
    let a = geom.abs_column(c);
    r == k && a >= -(n as i64) && a < n as i64
}

fn check_segment(geom: &BoxGeometry, dual: &DualGeometry, n: usize, k: usize) -> Result<()> {
    if n == 0 || n > max_segment_half_width(geom) {
        return Err(Error::Geometry(format!(
            "segment half-width {n} outside 1..={}",
            max_segment_half_width(geom)
        )));
    }
    if k >= dual.rows() {
        return Err(Error::Geometry(format!("dual row {k} outside 0..{}", dual.rows())));
    }
    Ok(())
}

/// `N_{n,k}`: tethered walls with a dual vertex on `I_{n,k}`.
pub fn count_nnk(walls: &[DomainWall], geom: &BoxGeometry, dual: &DualGeometry, n: usize, k: usize) -> Result<usize> {
    check_segment(geom, dual, n, k)?;
    Ok(walls
        .iter()
        .filter(|w| w.tethered && w.vertices.iter().any(|&v| on_segment(geom, dual, v, n, k)))
        .count())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallCountGrid {
    pub ns: Vec<usize>,
    pub ks: Vec<usize>,
    /// `counts[i][j]` is `N_{ns[i], ks[j]}`.
    pub counts: Vec<Vec<usize>>,
}

impl WallCountGrid {
    pub fn get(&self, n: usize, k: usize) -> Option<usize> {
        let i = self.ns.iter().position(|&x| x == n)?;
        let j = self.ks.iter().position(|&x| x == k)?;
        Some(self.counts[i][j])
    }
}

pub fn count_grid(
    walls: &[DomainWall],
    geom: &BoxGeometry,
    dual: &DualGeometry,
    ns: &[usize],
    ks: &[usize],
) -> Result<WallCountGrid> {
    let counts = ns
        .iter()
        .map(|&n| ks.iter().map(|&k| count_nnk(walls, geom, dual, n, k)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(WallCountGrid {
        ns: ns.to_vec(),
        ks: ks.to_vec(),
        counts,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallBoundViolation {
    pub n: usize,
    pub k: usize,
    pub n_k: usize,
    pub n_0: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallBoundReport {
    pub checked: usize,
    pub violations: Vec<WallBoundViolation>,
}

impl WallBoundReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `N_{n,k} - N_{n,0} >= -2k` on every grid entry.
pub fn wall_bound_check(grid: &WallCountGrid) -> Result<WallBoundReport> {
    let zero = grid
        .ks
        .iter()
        .position(|&k| k == 0)
        .ok_or_else(|| Error::InvalidArgument("wall count grid has no k = 0 column".into()))?;
    let mut report = WallBoundReport {
        checked: 0,
        violations: Vec::new(),
    };
    for (i, &n) in grid.ns.iter().enumerate() {
        let n_0 = grid.counts[i][zero];
        for (jx, &k) in grid.ks.iter().enumerate() {
            let n_k = grid.counts[i][jx];
            report.checked += 1;
            if (n_k as i64) - (n_0 as i64) < -2 * k as i64 {
                report.violations.push(WallBoundViolation { n, k, n_k, n_0 });
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharedVertex {
    pub walls: [usize; 2],
    pub vertex: DualVertexId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TetherPath {
    pub wall: usize,
    /// Dual vertices from one x-axis vertex to another.
    pub path: Vec<DualVertexId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoubleTetherReport {
    pub tethered_walls: usize,
    pub shared_vertices: Vec<SharedVertex>,
    pub double_tethers: Vec<TetherPath>,
}

impl DoubleTetherReport {
    pub fn passed(&self) -> bool {
        self.shared_vertices.is_empty() && self.double_tethers.is_empty()
    }
}

/// Checks that tethered walls are vertex-disjoint and that no wall links two
/// distinct x-axis vertices.
pub fn no_double_tether_check(walls: &[DomainWall], dual: &DualGeometry) -> DoubleTetherReport {
    let mut owner = vec![usize::MAX; dual.num_vertices()];
    let mut report = DoubleTetherReport {
        tethered_walls: 0,
        shared_vertices: Vec::new(),
        double_tethers: Vec::new(),
    };
    for (i, wall) in walls.iter().enumerate() {
        if !wall.tethered {
            continue;
        }
        report.tethered_walls += 1;
        for &v in &wall.vertices {
            if owner[v] != usize::MAX && owner[v] != i {
                report.shared_vertices.push(SharedVertex {
                    walls: [owner[v], i],
                    vertex: v,
                });
            } else {
                owner[v] = i;
            }
        }
        if let Some(path) = x_axis_path(wall, dual) {
            report.double_tethers.push(TetherPath { wall: i, path });
        }
    }
    report
}

/// Breadth-first path inside the wall between its two smallest x-axis vertices.
fn x_axis_path(wall: &DomainWall, dual: &DualGeometry) -> Option<Vec<DualVertexId>> {
    let anchors: Vec<DualVertexId> = wall.vertices.iter().copied().filter(|&v| dual.is_x_axis(v)).collect();
    if anchors.len() < 2 {
        return None;
    }
    let (start, goal) = (anchors[0], anchors[1]);
    let mut prev = std::collections::BTreeMap::new();
    prev.insert(start, start);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        if v == goal {
            let mut path = vec![goal];
            let mut x = goal;
            while x != start {
                x = prev[&x];
                path.push(x);
            }
            path.reverse();
            return Some(path);
        }
        for &e in dual.incident_edges(v) {
            if wall.edges.binary_search(&e).is_err() {
                continue;
            }
            let [a, b] = dual.endpoints(e);
            let u = if a == v { b } else { a };
            if let Entry::Vacant(slot) = prev.entry(u) {
                slot.insert(v);
                queue.push_back(u);
            }
        }
    }
    None
}

/// One row per interface edge: dual endpoints in doubled coordinates, wall index, tethered flag.
pub fn write_walls_csv<W: Write>(walls: &[DomainWall], dual: &DualGeometry, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv write: {e}"));
    w.write_record(["dual_edge", "x1", "y1", "x2", "y2", "wall", "tethered"]).map_err(io)?;
    for (i, wall) in walls.iter().enumerate() {
        for &e in &wall.edges {
            let [u, v] = dual.endpoints(e);
            let (x1, y1) = dual.doubled_coords(u);
            let (x2, y2) = dual.doubled_coords(v);
            w.write_record([
                e.to_string(),
                x1.to_string(),
                y1.to_string(),
                x2.to_string(),
                y2.to_string(),
                i.to_string(),
                wall.tethered.to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv write: {e}")))?;
    Ok(())
}
