//! Joint critical sets of two edges.
//!
//! With `E'(η_b, η_e)` the exterior energy (all edges but `b` and `e`) of
//! the state minimizing the energy at prescribed signs across `b` and `e`,
//! the ground state at couplings `(J_b, J_e)` carries the label minimizing
//! `E'(η) - J_b η_b - J_e η_e`. The four constants
//!
//! ```text
//! C1 = ½(E'(+,+) - E'(-,+))    C2 = ½(E'(+,-) - E'(-,-))
//! C3 = ½(E'(+,+) - E'(+,-))    C4 = ½(E'(-,+) - E'(-,-))
//! ```
//!
//! describe the boundary between those four regions: four axis-parallel
//! rays plus, unless `C1 = C2`, a diagonal segment of slope `±1`.

use serde::{Deserialize, Serialize};

use super::{critical_value, exterior_energy, solve_with_edge_signs};
use crate::disorder::CouplingConfig;
use crate::error::{Error, Result};
use crate::lattice::EdgeId;
use crate::solver::solve;
use crate::Sign;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    /// `C1 = C2`
    Cross,
    /// `C1 > C2`
    PositiveDiag,
    /// `C1 < C2`
    NegativeDiag,
}

/// Ground-state signs across `b` and `e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label {
    pub b: Sign,
    pub e: Sign,
}

impl Label {
    pub const fn new(b: Sign, e: Sign) -> Self {
        Self { b, e }
    }

    pub fn symbol(&self) -> String {
        format!("{}{}", self.b.symbol(), self.e.symbol())
    }
}

const PP: Label = Label::new(Sign::Plus, Sign::Plus);
const PM: Label = Label::new(Sign::Plus, Sign::Minus);
const MP: Label = Label::new(Sign::Minus, Sign::Plus);
const MM: Label = Label::new(Sign::Minus, Sign::Minus);

/// `None` bounds are infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

impl Interval {
    fn point(x: f64) -> Self {
        Self { lo: Some(x), hi: Some(x) }
    }

    fn above(x: f64) -> Self {
        Self { lo: Some(x), hi: None }
    }

    fn below(x: f64) -> Self {
        Self { lo: None, hi: Some(x) }
    }

    fn between(a: f64, b: f64) -> Self {
        Self {
            lo: Some(a.min(b)),
            hi: Some(a.max(b)),
        }
    }

    fn gap(&self, x: f64) -> f64 {
        let lo = self.lo.unwrap_or(f64::NEG_INFINITY);
        let hi = self.hi.unwrap_or(f64::INFINITY);
        if x < lo {
            lo - x
        } else if x > hi {
            x - hi
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    /// `J_b` fixed.
    Vertical,
    /// `J_e` fixed.
    Horizontal,
    /// Slope `+1`, from `(jb.lo, je.lo)` to `(jb.hi, je.hi)`.
    Diagonal,
    /// Slope `-1`, from `(jb.lo, je.hi)` to `(jb.hi, je.lo)`.
    AntiDiagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub axis_aligned: bool,
    pub jb: Interval,
    pub je: Interval,
    /// Ground-state labels on the two sides.
    pub separates: [Label; 2],
}

impl Segment {
    fn new(kind: SegmentKind, jb: Interval, je: Interval, separates: [Label; 2]) -> Self {
        Self {
            kind,
            axis_aligned: matches!(kind, SegmentKind::Vertical | SegmentKind::Horizontal),
            jb,
            je,
            separates,
        }
    }

    pub fn distance(&self, jb: f64, je: f64) -> f64 {
        match self.kind {
            SegmentKind::Vertical | SegmentKind::Horizontal => self.jb.gap(jb).hypot(self.je.gap(je)),
            SegmentKind::Diagonal | SegmentKind::AntiDiagonal => {
                let (x1, x2) = (self.jb.lo.unwrap(), self.jb.hi.unwrap());
                let (y1, y2) = match self.kind {
                    SegmentKind::Diagonal => (self.je.lo.unwrap(), self.je.hi.unwrap()),
                    _ => (self.je.hi.unwrap(), self.je.lo.unwrap()),
                };
                let (dx, dy) = (x2 - x1, y2 - y1);
                let len2 = dx * dx + dy * dy;
                let t = if len2 > 0.0 {
                    (((jb - x1) * dx + (je - y1) * dy) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                (jb - x1 - t * dx).hypot(je - y1 - t * dy)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalSet2 {
    pub b: EdgeId,
    pub e: EdgeId,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// `E'` for labels `++`, `+-`, `-+`, `--`.
    pub exterior_energies: [f64; 4],
    pub case: CaseKind,
    pub segments: Vec<Segment>,
}

/// Relative tolerance for declaring `C1 = C2`.
const CROSS_TOLERANCE: f64 = 1e-10;

impl CriticalSet2 {
    pub fn from_exterior_energies(b: EdgeId, e: EdgeId, ext: [f64; 4]) -> Self {
        let [pp, pm, mp, mm] = ext;
        let (c1, c2, c3, c4) = (0.5 * (pp - mp), 0.5 * (pm - mm), 0.5 * (pp - pm), 0.5 * (mp - mm));
        let scale = 1.0 + c1.abs().max(c2.abs());
        let case = if (c1 - c2).abs() <= CROSS_TOLERANCE * scale {
            CaseKind::Cross
        } else if c1 > c2 {
            CaseKind::PositiveDiag
        } else {
            CaseKind::NegativeDiag
        };
        use SegmentKind::*;
        let segments = match case {
            CaseKind::Cross => vec![
                Segment::new(Vertical, Interval::point(c1), Interval::above(c3), [MP, PP]),
                Segment::new(Vertical, Interval::point(c1), Interval::below(c3), [MM, PM]),
                Segment::new(Horizontal, Interval::above(c1), Interval::point(c3), [PM, PP]),
                Segment::new(Horizontal, Interval::below(c1), Interval::point(c3), [MM, MP]),
            ],
            CaseKind::PositiveDiag => vec![
                Segment::new(Vertical, Interval::point(c1), Interval::above(c3), [MP, PP]),
                Segment::new(Horizontal, Interval::above(c1), Interval::point(c3), [PM, PP]),
                Segment::new(Vertical, Interval::point(c2), Interval::below(c4), [MM, PM]),
                Segment::new(Horizontal, Interval::below(c2), Interval::point(c4), [MM, MP]),
                Segment::new(Diagonal, Interval::between(c2, c1), Interval::between(c4, c3), [PM, MP]),
            ],
            CaseKind::NegativeDiag => vec![
                Segment::new(Vertical, Interval::point(c1), Interval::above(c4), [MP, PP]),
                Segment::new(Horizontal, Interval::below(c1), Interval::point(c4), [MM, MP]),
                Segment::new(Vertical, Interval::point(c2), Interval::below(c3), [MM, PM]),
                Segment::new(Horizontal, Interval::above(c2), Interval::point(c3), [PM, PP]),
                Segment::new(AntiDiagonal, Interval::between(c1, c2), Interval::between(c3, c4), [MM, PP]),
            ],
        };
        Self {
            b,
            e,
            c1,
            c2,
            c3,
            c4,
            exterior_energies: ext,
            case,
            segments,
        }
    }

    /// `(C1 - C2) - (C3 - C4)`.
    pub fn identity_residual(&self) -> f64 {
        (self.c1 - self.c2) - (self.c3 - self.c4)
    }

    /// Ground-state label predicted at `(J_b, J_e)` off the critical set.
    pub fn label_at(&self, jb: f64, je: f64) -> Label {
        let (c1, c2, c3, c4) = (self.c1, self.c2, self.c3, self.c4);
        let side = |x: f64, t: f64| if x > t { Sign::Plus } else { Sign::Minus };
        match self.case {
            CaseKind::Cross => Label::new(side(jb, c1), side(je, c3)),
            CaseKind::PositiveDiag => {
                if jb > c1 {
                    Label::new(Sign::Plus, side(je, c3))
                } else if jb < c2 {
                    Label::new(Sign::Minus, side(je, c4))
                } else if je > jb - c1 + c3 {
                    MP
                } else {
                    PM
                }
            }
            CaseKind::NegativeDiag => {
                if jb > c2 {
                    Label::new(Sign::Plus, side(je, c3))
                } else if jb < c1 {
                    Label::new(Sign::Minus, side(je, c4))
                } else if jb + je > c1 + c4 {
                    PP
                } else {
                    MM
                }
            }
        }
    }

    /// Euclidean distance from `(J_b, J_e)` to the critical set.
    pub fn distance(&self, jb: f64, je: f64) -> f64 {
        self.segments
            .iter()
            .map(|s| s.distance(jb, je))
            .fold(f64::INFINITY, f64::min)
    }

    /// Critical value of `b` as a function of `J_e`.
    pub fn critical_b(&self, je: f64) -> f64 {
        let (c1, c2, c3, c4) = (self.c1, self.c2, self.c3, self.c4);
        match self.case {
            CaseKind::Cross => c1,
            CaseKind::PositiveDiag => {
                if je >= c3 {
                    c1
                } else if je <= c4 {
                    c2
                } else {
                    je + c1 - c3
                }
            }
            CaseKind::NegativeDiag => {
                if je >= c4 {
                    c1
                } else if je <= c3 {
                    c2
                } else {
                    c1 + c4 - je
                }
            }
        }
    }

    /// Critical value of `e` as a function of `J_b`.
    pub fn critical_e(&self, jb: f64) -> f64 {
        let (c1, c2, c3, c4) = (self.c1, self.c2, self.c3, self.c4);
        match self.case {
            CaseKind::Cross => c3,
            CaseKind::PositiveDiag => {
                if jb >= c1 {
                    c3
                } else if jb <= c2 {
                    c4
                } else {
                    jb - c1 + c3
                }
            }
            CaseKind::NegativeDiag => {
                if jb >= c2 {
                    c3
                } else if jb <= c1 {
                    c4
                } else {
                    c1 + c4 - jb
                }
            }
        }
    }

    /// Evenly spaced `(J_b, J_e)` axes covering the interesting part of the plane.
    pub fn grid_axes(&self, points: usize) -> (Vec<f64>, Vec<f64>) {
        let axis = |a: f64, b: f64| {
            let (lo, hi) = (a.min(b), a.max(b));
            let pad = 1.0 + (hi - lo);
            let (start, end) = (lo - pad, hi + pad);
            let step = (end - start) / (points.max(2) - 1) as f64;
            (0..points).map(|i| start + step * i as f64).collect::<Vec<f64>>()
        };
        (axis(self.c1, self.c2), axis(self.c3, self.c4))
    }
}

fn check_pair(j: &CouplingConfig, b: EdgeId, e: EdgeId) -> Result<()> {
    let m = j.geometry().num_edges();
    if b >= m || e >= m {
        return Err(Error::InvalidArgument(format!("edges {b}, {e} must be below {m}")));
    }
    if b == e {
        return Err(Error::InvalidArgument("the two edges must differ".into()));
    }
    Ok(())
}

pub fn two_bond_critical_set(j: &CouplingConfig, b: EdgeId, e: EdgeId) -> Result<CriticalSet2> {
    check_pair(j, b, e)?;
    let mut interior = [b, e];
    interior.sort_unstable();
    let mut ext = [0.0; 4];
    for (slot, (sb, se)) in [
        (Sign::Plus, Sign::Plus),
        (Sign::Plus, Sign::Minus),
        (Sign::Minus, Sign::Plus),
        (Sign::Minus, Sign::Minus),
    ]
    .into_iter()
    .enumerate()
    {
        let state = solve_with_edge_signs(j, &[(b, sb), (e, se)])?;
        ext[slot] = exterior_energy(j, state.spins(), &interior);
    }
    Ok(CriticalSet2::from_exterior_energies(b, e, ext))
}

/// Ground-state labels over a grid; `labels[i][k]` is at `(jb[i], je[k])`.
pub fn label_grid(j: &CouplingConfig, b: EdgeId, e: EdgeId, jb: &[f64], je: &[f64]) -> Result<Vec<Vec<Label>>> {
    check_pair(j, b, e)?;
    jb.iter()
        .map(|&x| {
            je.iter()
                .map(|&y| {
                    let k = j.with_values(&[(b, x), (e, y)])?;
                    let gs = solve(&k, None)?;
                    Ok(Label::new(gs.edge_sign(k.geometry(), b), gs.edge_sign(k.geometry(), e)))
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyEntry {
    /// Edge whose critical value was recomputed.
    pub edge: EdgeId,
    /// Value given to the other edge's coupling.
    pub other_value: f64,
    pub region: String,
    pub computed: f64,
    pub predicted: f64,
}

impl ConsistencyEntry {
    pub fn error(&self) -> f64 {
        (self.computed - self.predicted).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub set: CriticalSet2,
    pub entries: Vec<ConsistencyEntry>,
    pub max_error: f64,
}

impl ConsistencyReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_error <= tol
    }
}

/// Recomputes the single-bond critical values of `b` and `e` with the other
/// coupling placed in each band of the piecewise formula.
pub fn consistency_check(j: &CouplingConfig, b: EdgeId, e: EdgeId) -> Result<ConsistencyReport> {
    let set = two_bond_critical_set(j, b, e)?;
    let probes = |a: f64, c: f64| -> Vec<(f64, &'static str)> {
        let (lo, hi) = (a.min(c), a.max(c));
        let pad = 1.0 + (hi - lo);
        let mut out = vec![(hi + pad, "above")];
        if set.case != CaseKind::Cross {
            out.push((0.5 * (lo + hi), "middle"));
        }
        out.push((lo - pad, "below"));
        out
    };
    let mut entries = Vec::new();
    for (je, region) in probes(set.c3, set.c4) {
        entries.push(ConsistencyEntry {
            edge: b,
            other_value: je,
            region: region.into(),
            computed: critical_value(&j.with_value(e, je)?, b)?,
            predicted: set.critical_b(je),
        });
    }
    for (jb, region) in probes(set.c1, set.c2) {
        entries.push(ConsistencyEntry {
            edge: e,
            other_value: jb,
            region: region.into(),
            computed: critical_value(&j.with_value(b, jb)?, e)?,
            predicted: set.critical_e(jb),
        });
    }
    let max_error = entries.iter().map(ConsistencyEntry::error).fold(0.0, f64::max);
    Ok(ConsistencyReport { set, entries, max_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::{sample_couplings, DistributionSpec};
    use crate::excitation::critical_contour;
    use crate::lattice::{build_box, build_dual, EdgeKind};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn argmin_label(ext: [f64; 4], jb: f64, je: f64) -> Label {
        let labels = [PP, PM, MP, MM];
        let mut best = (f64::INFINITY, PP);
        for (k, l) in labels.iter().enumerate() {
            let v = ext[k] - jb * l.b.value() - je * l.e.value();
            if v < best.0 {
                best = (v, *l);
            }
        }
        best.1
    }

    proptest! {
        #[test]
        fn classifier_matches_affine_argmin(
            ext in prop::array::uniform4(-5.0f64..5.0),
            jb in -8.0f64..8.0,
            je in -8.0f64..8.0,
        ) {
            let set = CriticalSet2::from_exterior_energies(0, 1, ext);
            prop_assume!(set.distance(jb, je) > 1e-9);
            prop_assert_eq!(set.label_at(jb, je), argmin_label(ext, jb, je));
        }

        #[test]
        fn piecewise_critical_values_match_argmin(
            ext in prop::array::uniform4(-5.0f64..5.0),
            other in -8.0f64..8.0,
        ) {
            let set = CriticalSet2::from_exterior_energies(0, 1, ext);
            let cb = set.critical_b(other);
            prop_assert_eq!(argmin_label(ext, cb + 1e-7, other).b, Sign::Plus);
            prop_assert_eq!(argmin_label(ext, cb - 1e-7, other).b, Sign::Minus);
            let ce = set.critical_e(other);
            prop_assert_eq!(argmin_label(ext, other, ce + 1e-7).e, Sign::Plus);
            prop_assert_eq!(argmin_label(ext, other, ce - 1e-7).e, Sign::Minus);
        }
    }

    #[test]
    fn decoupled_exterior_is_a_cross_at_zero() {
        let g = Arc::new(build_box(3, 3).unwrap());
        let mut values = vec![0.0; g.num_edges()];
        values[2] = 0.4;
        values[7] = -1.1;
        let j = CouplingConfig::from_values(g, values).unwrap();
        let set = two_bond_critical_set(&j, 2, 7).unwrap();
        assert_eq!((set.c1, set.c2, set.c3, set.c4), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(set.case, CaseKind::Cross);
        assert_eq!(set.segments.len(), 4);
    }

    #[test]
    fn grid_labels_follow_critical_set() {
        let g = Arc::new(build_box(3, 3).unwrap());
        let b = g.edge_at(1, 1, EdgeKind::Horizontal).unwrap();
        let e = g.edge_at(1, 1, EdgeKind::Vertical).unwrap();
        for i in 0..4 {
            let j = sample_couplings(g.clone(), &DistributionSpec::gaussian(1.0), 71, i).unwrap();
            let set = two_bond_critical_set(&j, b, e).unwrap();
            assert!(set.identity_residual().abs() <= 1e-9);
            let (xs, ys) = set.grid_axes(21);
            let cell = (xs[1] - xs[0]).max(ys[1] - ys[0]);
            let labels = label_grid(&j, b, e, &xs, &ys).unwrap();
            for (a, &x) in xs.iter().enumerate() {
                for (c, &y) in ys.iter().enumerate() {
                    if set.distance(x, y) >= cell {
                        assert_eq!(labels[a][c], set.label_at(x, y), "sample {i} at ({x}, {y})");
                    }
                }
            }
        }
    }

    #[test]
    fn constants_independent_of_both_couplings() {
        let g = Arc::new(build_box(4, 3).unwrap());
        let j = sample_couplings(g.clone(), &DistributionSpec::gaussian(1.0), 3, 3).unwrap();
        let (b, e) = (1, 9);
        let set = two_bond_critical_set(&j, b, e).unwrap();
        let k = j.with_values(&[(b, 2.5), (e, -0.3)]).unwrap();
        let other = two_bond_critical_set(&k, b, e).unwrap();
        assert_eq!(set.exterior_energies, other.exterior_energies);
    }

    #[test]
    fn consistency_on_seeded_instances() {
        let g = Arc::new(build_box(4, 4).unwrap());
        for i in 0..8 {
            let j = sample_couplings(g.clone(), &DistributionSpec::gaussian(1.0), 13, i).unwrap();
            let r = consistency_check(&j, 5, 6).unwrap();
            assert!(r.passed(1e-9), "{r:?}");
            let r = consistency_check(&j, 2, 20).unwrap();
            assert!(r.passed(1e-9), "{r:?}");
        }
    }

    #[test]
    fn middle_band_membership() {
        let g = Arc::new(build_box(4, 4).unwrap());
        let d = build_dual(&g);
        let (b, e) = (g.edge_at(1, 1, EdgeKind::Horizontal).unwrap(), g.edge_at(2, 1, EdgeKind::Vertical).unwrap());
        for i in 0..6 {
            let j = sample_couplings(g.clone(), &DistributionSpec::gaussian(1.0), 8, i).unwrap();
            let set = two_bond_critical_set(&j, b, e).unwrap();
            let (lo, hi) = (set.c1.min(set.c2), set.c1.max(set.c2));
            let (xs, _) = set.grid_axes(15);
            for &x in &xs {
                // A zero coupling is satisfied in neither state.
                if (x - lo).abs() < 1e-6 || (x - hi).abs() < 1e-6 || x == 0.0 {
                    continue;
                }
                let k = j.with_value(b, x).unwrap();
                let inside = lo < x && x < hi;
                assert_eq!(critical_contour(&k, &d, e).unwrap().contains(b), inside, "sample {i} J_b={x}");
            }
        }
    }

    #[test]
    fn rejects_bad_pairs() {
        let g = Arc::new(build_box(3, 3).unwrap());
        let j = CouplingConfig::uniform(g, 1.0).unwrap();
        assert!(two_bond_critical_set(&j, 2, 2).is_err());
        assert!(two_bond_critical_set(&j, 2, 99).is_err());
    }
}
