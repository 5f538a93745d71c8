//! Half-plane box geometry on a cylinder, its dual lattice, and the
//! enumerators of small vertex sets and dual circuits used to verify
//! ground states.
//!
//! Vertices are indexed row-major from the bottom row: `id = row * width + col`.
//! Columns wrap around (periodic horizontal boundary); rows do not (free
//! vertical boundary). Dual vertex `(col, row)` sits at `(col + 1/2, row - 1/2)`,
//! so dual row 0 is the dual x-axis and dual row `height` lies above the top
//! spin row.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;
pub type DualVertexId = usize;

/// Default cap on the number of items an enumerator may produce.
pub const DEFAULT_ENUMERATION_CAP: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Horizontal,
    Vertical,
}

/// A primal edge. For horizontal edges `a` is the left endpoint (the wrap
/// edge runs from the last column back to column 0); for vertical edges `a`
/// is the lower endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
    pub kind: EdgeKind,
    pub wrap: bool,
}

impl Edge {
    pub fn endpoints(&self) -> [VertexId; 2] {
        [self.a, self.b]
    }

    pub fn other(&self, v: VertexId) -> VertexId {
        if v == self.a {
            self.b
        } else {
            debug_assert_eq!(v, self.b);
            self.a
        }
    }

    pub fn touches(&self, v: VertexId) -> bool {
        self.a == v || self.b == v
    }
}

/// Position-independent identity of an edge, used to key coupling streams so
/// that nested boxes share the couplings of their common edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKey {
    /// Non-wrap edge with absolute endpoint coordinates (lower/left first).
    Plain { x1: i64, y1: i64, x2: i64, y2: i64 },
    /// The wrap edge of a given row; it only exists for one box width.
    Wrap { width: usize, y: i64 },
}

/// A finite box of `width` columns and `height` rows with periodic
/// horizontal and free vertical boundary conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxGeometry {
    width: usize,
    height: usize,
    x_offset: i64,
    edges: Vec<Edge>,
    incident: Vec<Vec<EdgeId>>,
    neighbors: Vec<Vec<VertexId>>,
    horizontal_by_row: Vec<Vec<EdgeId>>,
    vertical_by_row: Vec<Vec<EdgeId>>,
}

/// Builds a `width × height` box. Columns are centered: column `c` has
/// absolute abscissa `c - (width - 1) / 2`.
pub fn build_box(width: usize, height: usize) -> Result<BoxGeometry> {
    if width == 0 || height == 0 {
        return Err(Error::Geometry(format!(
            "box dimensions must be positive, got {width}x{height}"
        )));
    }
    let n = width * height;
    let mut edges = Vec::new();
    let mut horizontal_by_row = vec![Vec::new(); height];
    let mut vertical_by_row = vec![Vec::new(); height.saturating_sub(1)];

    for (r, row_edges) in horizontal_by_row.iter_mut().enumerate() {
        let base = r * width;
        // W = 1: no horizontal edge; W = 2: a single edge, no doubled wrap.
        let count = match width {
            1 => 0,
            2 => 1,
            _ => width,
        };
        for c in 0..count {
            let wrap = c == width - 1;
            row_edges.push(edges.len());
            edges.push(Edge {
                a: base + c,
                b: base + (c + 1) % width,
                kind: EdgeKind::Horizontal,
                wrap,
            });
        }
    }
    for (r, row_edges) in vertical_by_row.iter_mut().enumerate() {
        for c in 0..width {
            row_edges.push(edges.len());
            edges.push(Edge {
                a: r * width + c,
                b: (r + 1) * width + c,
                kind: EdgeKind::Vertical,
                wrap: false,
            });
        }
    }

    let mut incident = vec![Vec::new(); n];
    let mut neighbors = vec![Vec::new(); n];
    for (id, e) in edges.iter().enumerate() {
        incident[e.a].push(id);
        incident[e.b].push(id);
        neighbors[e.a].push(e.b);
        neighbors[e.b].push(e.a);
    }
    for list in &mut neighbors {
        list.sort_unstable();
        list.dedup();
    }

    Ok(BoxGeometry {
        width,
        height,
        x_offset: -(((width - 1) / 2) as i64),
        edges,
        incident,
        neighbors,
        horizontal_by_row,
        vertical_by_row,
    })
}

/// The square box `[-n, n] × [0, 2n]`.
pub fn square_box(n: usize) -> Result<BoxGeometry> {
    build_box(2 * n + 1, 2 * n + 1)
}

impl BoxGeometry {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn periodic_horizontal(&self) -> bool {
        true
    }

    pub fn num_vertices(&self) -> usize {
        self.width * self.height
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    pub fn vertex(&self, col: usize, row: usize) -> VertexId {
        debug_assert!(col < self.width && row < self.height);
        row * self.width + col
    }

    /// `(col, row)` of a vertex.
    pub fn coords(&self, v: VertexId) -> (usize, usize) {
        (v % self.width, v / self.width)
    }

    /// Absolute abscissa of a column.
    pub fn abs_column(&self, col: usize) -> i64 {
        col as i64 + self.x_offset
    }

    /// Column holding absolute abscissa `x`, if it lies in the box.
    pub fn column_of(&self, x: i64) -> Option<usize> {
        let c = x - self.x_offset;
        (0..self.width as i64).contains(&c).then_some(c as usize)
    }

    pub fn x_offset(&self) -> i64 {
        self.x_offset
    }

    pub fn incident_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.incident[v]
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.neighbors[v]
    }

    pub fn horizontal_edges(&self, row: usize) -> &[EdgeId] {
        &self.horizontal_by_row[row]
    }

    /// Vertical edges between `row` and `row + 1`.
    pub fn vertical_edges(&self, row: usize) -> &[EdgeId] {
        &self.vertical_by_row[row]
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.incident[u]
            .iter()
            .copied()
            .find(|&e| self.edges[e].other(u) == v)
    }

    /// Edge identified by its lower/left endpoint and orientation.
    pub fn edge_at(&self, col: usize, row: usize, kind: EdgeKind) -> Option<EdgeId> {
        if col >= self.width || row >= self.height {
            return None;
        }
        let v = self.vertex(col, row);
        self.incident[v]
            .iter()
            .copied()
            .find(|&e| self.edges[e].a == v && self.edges[e].kind == kind)
    }

    pub fn edge_key(&self, id: EdgeId) -> EdgeKey {
        let e = &self.edges[id];
        let (ca, ra) = self.coords(e.a);
        let (cb, rb) = self.coords(e.b);
        if e.wrap {
            EdgeKey::Wrap {
                width: self.width,
                y: ra as i64,
            }
        } else {
            EdgeKey::Plain {
                x1: self.abs_column(ca),
                y1: ra as i64,
                x2: self.abs_column(cb),
                y2: rb as i64,
            }
        }
    }

    /// Looks an edge up by its key; `None` if this box does not contain it.
    pub fn edge_by_key(&self, key: EdgeKey) -> Option<EdgeId> {
        match key {
            EdgeKey::Wrap { width, y } => {
                if width != self.width || y < 0 || y as usize >= self.height || width < 3 {
                    return None;
                }
                self.edge_at(width - 1, y as usize, EdgeKind::Horizontal)
            }
            EdgeKey::Plain { x1, y1, x2, y2 } => {
                if y1 < 0 || y2 < 0 || y1 as usize >= self.height || y2 as usize >= self.height {
                    return None;
                }
                let (c1, c2) = (self.column_of(x1)?, self.column_of(x2)?);
                let id = self.edge_between(self.vertex(c1, y1 as usize), self.vertex(c2, y2 as usize))?;
                (!self.edges[id].wrap).then_some(id)
            }
        }
    }

    /// Vertex permutation induced by shifting every column right by `shift`.
    pub fn translate_vertex(&self, v: VertexId, shift: usize) -> VertexId {
        let (c, r) = self.coords(v);
        self.vertex((c + shift) % self.width, r)
    }

    /// Image of an edge under [`translate_vertex`](Self::translate_vertex).
    pub fn translate_edge(&self, e: EdgeId, shift: usize) -> Option<EdgeId> {
        let edge = &self.edges[e];
        self.edge_between(
            self.translate_vertex(edge.a, shift),
            self.translate_vertex(edge.b, shift),
        )
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        v < self.num_vertices()
    }
}

/// Dual lattice of a [`BoxGeometry`]. Dual edge ids coincide with the ids of
/// the primal edges they bisect.
#[derive(Debug, Clone, PartialEq)]
pub struct DualGeometry {
    width: usize,
    rows: usize,
    edges: Vec<[DualVertexId; 2]>,
    incident: Vec<Vec<EdgeId>>,
}

pub fn build_dual(geom: &BoxGeometry) -> DualGeometry {
    let w = geom.width();
    let rows = geom.height() + 1;
    let id = |c: usize, r: usize| r * w + c;
    let edges: Vec<[DualVertexId; 2]> = geom
        .edges()
        .iter()
        .map(|e| {
            let (c, r) = geom.coords(e.a);
            match e.kind {
                EdgeKind::Horizontal => [id(c, r), id(c, r + 1)],
                EdgeKind::Vertical => [id((c + w - 1) % w, r + 1), id(c, r + 1)],
            }
        })
        .collect();
    let mut incident = vec![Vec::new(); w * rows];
    for (eid, &[u, v]) in edges.iter().enumerate() {
        incident[u].push(eid);
        if u != v {
            incident[v].push(eid);
        }
    }
    DualGeometry {
        width: w,
        rows,
        edges,
        incident,
    }
}

impl DualGeometry {
    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of dual rows, including the dual x-axis and the row above the box.
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn num_vertices(&self) -> usize {
        self.width * self.rows
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex(&self, col: usize, row: usize) -> DualVertexId {
        row * self.width + col
    }

    /// `(col, row)` of a dual vertex; it sits at `(col + 1/2, row - 1/2)`.
    pub fn coords(&self, v: DualVertexId) -> (usize, usize) {
        (v % self.width, v / self.width)
    }

    /// Doubled coordinates `(2 col + 1, 2 row - 1)`, exact integers.
    pub fn doubled_coords(&self, v: DualVertexId) -> (i64, i64) {
        let (c, r) = self.coords(v);
        (2 * c as i64 + 1, 2 * r as i64 - 1)
    }

    pub fn endpoints(&self, dual_edge: EdgeId) -> [DualVertexId; 2] {
        self.edges[dual_edge]
    }

    pub fn incident_edges(&self, v: DualVertexId) -> &[EdgeId] {
        &self.incident[v]
    }

    pub fn primal_edge(&self, dual_edge: EdgeId) -> EdgeId {
        dual_edge
    }

    pub fn dual_edge(&self, primal_edge: EdgeId) -> EdgeId {
        primal_edge
    }

    pub fn is_x_axis(&self, v: DualVertexId) -> bool {
        v < self.width
    }

    pub fn is_top(&self, v: DualVertexId) -> bool {
        v >= self.width * (self.rows - 1)
    }

    pub fn x_axis(&self) -> impl Iterator<Item = DualVertexId> {
        0..self.width
    }

    fn other(&self, e: EdgeId, v: DualVertexId) -> DualVertexId {
        let [a, b] = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }
}

/// Visits every connected vertex subset of size `1..=max_size` exactly once.
/// Returns the number of subsets visited.
pub fn for_each_connected_subset<F>(
    geom: &BoxGeometry,
    max_size: usize,
    cap: usize,
    mut visit: F,
) -> Result<usize>
where
    F: FnMut(&[VertexId]),
{
    if max_size == 0 {
        return Err(Error::InvalidArgument("max_size must be at least 1".into()));
    }
    let mut esu = Esu {
        geom,
        max_size,
        cap,
        count: 0,
        cover: vec![0; geom.num_vertices()],
        sub: Vec::with_capacity(max_size),
    };
    for v in 0..geom.num_vertices() {
        esu.push(v);
        let ext: Vec<VertexId> = geom.neighbors(v).iter().copied().filter(|&u| u > v).collect();
        esu.extend(ext, v, &mut visit)?;
        esu.pop();
    }
    Ok(esu.count)
}

/// Collects [`for_each_connected_subset`] into sorted vertex lists.
pub fn connected_subsets(geom: &BoxGeometry, max_size: usize) -> Result<Vec<Vec<VertexId>>> {
    let mut out = Vec::new();
    for_each_connected_subset(geom, max_size, DEFAULT_ENUMERATION_CAP, |s| {
        let mut s = s.to_vec();
        s.sort_unstable();
        out.push(s);
    })?;
    Ok(out)
}

// Wernicke's ESU: every connected set is generated once, from its smallest vertex.
struct Esu<'a> {
    geom: &'a BoxGeometry,
    max_size: usize,
    cap: usize,
    count: usize,
    cover: Vec<u32>,
    sub: Vec<VertexId>,
}

impl Esu<'_> {
    fn push(&mut self, w: VertexId) {
        self.sub.push(w);
        self.cover[w] += 1;
        for &u in self.geom.neighbors(w) {
            self.cover[u] += 1;
        }
    }

    fn pop(&mut self) {
        let w = self.sub.pop().expect("non-empty subset");
        self.cover[w] -= 1;
        for &u in self.geom.neighbors(w) {
            self.cover[u] -= 1;
        }
    }

    fn extend<F: FnMut(&[VertexId])>(
        &mut self,
        mut ext: Vec<VertexId>,
        root: VertexId,
        visit: &mut F,
    ) -> Result<()> {
        self.count += 1;
        if self.count > self.cap {
            return Err(Error::EnumerationBudget { cap: self.cap });
        }
        visit(&self.sub);
        if self.sub.len() == self.max_size {
            return Ok(());
        }
        while let Some(w) = ext.pop() {
            let mut next = ext.clone();
            for &u in self.geom.neighbors(w) {
                if u > root && self.cover[u] == 0 {
                    next.push(u);
                }
            }
            self.push(w);
            self.extend(next, root, visit)?;
            self.pop();
        }
        Ok(())
    }
}

/// A simple dual circuit, or a simple dual path whose endpoints are distinct
/// dual x-axis vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualWalk {
    pub edges: Vec<EdgeId>,
    pub vertices: Vec<DualVertexId>,
    pub closed: bool,
}

/// Visits all simple dual circuits (length `2..=max_len`, self-loops excluded)
/// and all simple dual paths of length `<= max_len` joining two distinct
/// dual x-axis vertices. Each walk is visited once.
pub fn for_each_dual_walk<F>(dual: &DualGeometry, max_len: usize, cap: usize, mut visit: F) -> Result<usize>
where
    F: FnMut(&DualWalk),
{
    if max_len == 0 {
        return Err(Error::InvalidArgument("max_len must be at least 1".into()));
    }
    let mut search = WalkSearch {
        dual,
        max_len,
        cap,
        count: 0,
        on_path: vec![false; dual.num_vertices()],
        walk: DualWalk {
            edges: Vec::new(),
            vertices: Vec::new(),
            closed: false,
        },
    };
    for s in 0..dual.num_vertices() {
        search.walk.vertices.push(s);
        search.on_path[s] = true;
        search.circuits_from(s, s, &mut visit)?;
        if dual.is_x_axis(s) {
            search.paths_from(s, s, &mut visit)?;
        }
        search.on_path[s] = false;
        search.walk.vertices.pop();
    }
    Ok(search.count)
}

pub fn dual_circuits_and_paths(dual: &DualGeometry, max_len: usize) -> Result<Vec<DualWalk>> {
    let mut out = Vec::new();
    for_each_dual_walk(dual, max_len, DEFAULT_ENUMERATION_CAP, |w| out.push(w.clone()))?;
    Ok(out)
}

struct WalkSearch<'a> {
    dual: &'a DualGeometry,
    max_len: usize,
    cap: usize,
    count: usize,
    on_path: Vec<bool>,
    walk: DualWalk,
}

impl WalkSearch<'_> {
    fn emit<F: FnMut(&DualWalk)>(&mut self, closed: bool, visit: &mut F) -> Result<()> {
        self.count += 1;
        if self.count > self.cap {
            return Err(Error::EnumerationBudget { cap: self.cap });
        }
        self.walk.closed = closed;
        visit(&self.walk);
        Ok(())
    }

    fn circuits_from<F: FnMut(&DualWalk)>(&mut self, start: DualVertexId, at: DualVertexId, visit: &mut F) -> Result<()> {
        let depth = self.walk.edges.len();
        if depth == self.max_len {
            return Ok(());
        }
        for &e in self.dual.incident_edges(at) {
            let next = self.dual.other(e, at);
            if next == at {
                continue;
            }
            if next == start {
                if depth >= 1 && self.walk.edges[0] < e {
                    self.walk.edges.push(e);
                    self.emit(true, visit)?;
                    self.walk.edges.pop();
                }
                continue;
            }
            if next < start || self.on_path[next] {
                continue;
            }
            self.step(e, next);
            self.circuits_from(start, next, visit)?;
            self.unstep(next);
        }
        Ok(())
    }

    fn paths_from<F: FnMut(&DualWalk)>(&mut self, start: DualVertexId, at: DualVertexId, visit: &mut F) -> Result<()> {
        if self.walk.edges.len() == self.max_len {
            return Ok(());
        }
        for &e in self.dual.incident_edges(at) {
            let next = self.dual.other(e, at);
            if self.on_path[next] {
                continue;
            }
            if self.dual.is_x_axis(next) {
                if next > start {
                    self.step(e, next);
                    self.emit(false, visit)?;
                    self.unstep(next);
                }
                continue;
            }
            self.step(e, next);
            self.paths_from(start, next, visit)?;
            self.unstep(next);
        }
        Ok(())
    }

    fn step(&mut self, e: EdgeId, next: DualVertexId) {
        self.walk.edges.push(e);
        self.walk.vertices.push(next);
        self.on_path[next] = true;
    }

    fn unstep(&mut self, next: DualVertexId) {
        self.walk.edges.pop();
        self.walk.vertices.pop();
        self.on_path[next] = false;
    }
}

/// Primal vertex 2-colouring induced by cutting `cut_edges`: crossing a cut
/// edge flips the colour. Returns `None` if the edge set is not a cut.
pub fn cut_sides(geom: &BoxGeometry, cut_edges: &[EdgeId]) -> Option<Vec<bool>> {
    let cut: BTreeSet<EdgeId> = cut_edges.iter().copied().collect();
    let n = geom.num_vertices();
    let mut side: Vec<Option<bool>> = vec![None; n];
    let mut stack = Vec::new();
    for root in 0..n {
        if side[root].is_some() {
            continue;
        }
        side[root] = Some(false);
        stack.push(root);
        while let Some(v) = stack.pop() {
            let sv = side[v].unwrap();
            for &e in geom.incident_edges(v) {
                let u = geom.edge(e).other(v);
                let su = sv ^ cut.contains(&e);
                match side[u] {
                    None => {
                        side[u] = Some(su);
                        stack.push(u);
                    }
                    Some(x) if x != su => return None,
                    _ => {}
                }
            }
        }
    }
    Some(side.into_iter().map(|s| s.unwrap()).collect())
}
