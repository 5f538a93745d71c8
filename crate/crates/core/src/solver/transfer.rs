//! Row-by-row transfer-matrix dynamic program.
//!
//! A row configuration is a bitmask with column `c` stored at bit
//! `W-1-c`, bit set meaning spin `-1`. With that layout numeric order on
//! masks agrees with the lexicographic order on canonical patterns, so a
//! forward trace that always takes the smallest admissible mask yields the
//! lexicographically smallest minimizer.
//!
//! Cost-to-go tables `f[r][m]` (optimal energy of rows `r..H` given row `r`
//! is `m`) are filled top-down. The vertical transfer `min_{m'} g[m ^ m'] +
//! f[m']` factorizes over columns, so each row costs `O(W 2^W)`.

use super::{check_clamp, Clamp, SolverOptions, SpinPair};
use crate::disorder::CouplingConfig;
use crate::error::{Error, Result};
use crate::lattice::BoxGeometry;
use crate::numeric::energy_tolerance;

struct Rows {
    width: usize,
    height: usize,
    /// `intra[r][m]`: energy of the horizontal bonds of row `r`.
    intra: Vec<Vec<f64>>,
    /// Vertical couplings between rows `r` and `r+1`, by column.
    vertical: Vec<Vec<f64>>,
    /// `inter[r][x]`: vertical energy between rows `r`, `r+1` when their masks differ by `x`.
    inter: Vec<Vec<f64>>,
}

/// Per-row spins forced by a clamp (and by the canonical choice at vertex 0).
#[derive(Clone)]
struct Forced {
    mask: Vec<u32>,
    value: Vec<u32>,
}

impl Forced {
    fn free(height: usize) -> Self {
        Self {
            mask: vec![0; height],
            value: vec![0; height],
        }
    }

    /// Returns false if `v` is already forced to the opposite spin.
    fn force(&mut self, geom: &BoxGeometry, v: usize, spin: i8) -> bool {
        let (c, r) = geom.coords(v);
        let bit = 1u32 << (geom.width() - 1 - c);
        let want = if spin < 0 { bit } else { 0 };
        if self.mask[r] & bit != 0 {
            return self.value[r] & bit == want;
        }
        self.mask[r] |= bit;
        self.value[r] |= want;
        true
    }

    fn admits(&self, r: usize, m: u32) -> bool {
        m & self.mask[r] == self.value[r]
    }
}

impl Rows {
    fn new(j: &CouplingConfig) -> Self {
        let geom = j.geometry();
        let (w, h) = (geom.width(), geom.height());
        let n = 1usize << w;
        // A horizontal bond costs -J when its two bits agree and +J otherwise.
        let intra = (0..h)
            .map(|r| {
                let edges: Vec<(u32, u32, f64)> = geom
                    .horizontal_edges(r)
                    .iter()
                    .map(|&e| {
                        let edge = geom.edge(e);
                        let bit = |v| (w - 1 - geom.coords(v).0) as u32;
                        (bit(edge.a), bit(edge.b), j.value(e))
                    })
                    .collect();
                (0..n as u32)
                    .map(|m| {
                        edges
                            .iter()
                            .map(|&(p, q, v)| if (m >> p ^ m >> q) & 1 == 1 { v } else { -v })
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let vertical: Vec<Vec<f64>> = (0..h.saturating_sub(1))
            .map(|r| {
                let mut col = vec![0.0; w];
                for &e in geom.vertical_edges(r) {
                    col[geom.coords(geom.edge(e).a).0] = j.value(e);
                }
                col
            })
            .collect();
        let inter = vertical
            .iter()
            .map(|col| {
                let mut g = vec![0.0; n];
                g[0] = -col.iter().sum::<f64>();
                for x in 1..n {
                    let low = x & x.wrapping_neg();
                    let c = w - 1 - low.trailing_zeros() as usize;
                    g[x] = g[x ^ low] + 2.0 * col[c];
                }
                g
            })
            .collect();
        Self {
            width: w,
            height: h,
            intra,
            vertical,
            inter,
        }
    }

    fn cost_to_go(&self, forced: &Forced) -> Vec<Vec<f64>> {
        let n = 1usize << self.width;
        let mut f = vec![vec![f64::INFINITY; n]; self.height];
        let top = self.height - 1;
        for m in 0..n {
            if forced.admits(top, m as u32) {
                f[top][m] = self.intra[top][m];
            }
        }
        for r in (0..top).rev() {
            let mut t = f[r + 1].clone();
            for (c, &jv) in self.vertical[r].iter().enumerate() {
                let bit = 1usize << (self.width - 1 - c);
                for block in t.chunks_exact_mut(2 * bit) {
                    let (lo, hi) = block.split_at_mut(bit);
                    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                        let (x, y) = (*a, *b);
                        *a = (x - jv).min(y + jv);
                        *b = (x + jv).min(y - jv);
                    }
                }
            }
            for m in 0..n {
                if forced.admits(r, m as u32) {
                    f[r][m] = self.intra[r][m] + t[m];
                }
            }
        }
        f
    }

    /// Smallest row sequence whose energy is within `threshold`, and whether
    /// more than one sequence qualifies.
    fn trace(&self, f: &[Vec<f64>], threshold: f64) -> Option<(Vec<u32>, bool)> {
        let n = 1u32 << self.width;
        let mut rows = Vec::with_capacity(self.height);
        let mut multiple = false;
        let mut prefix = 0.0;
        for r in 0..self.height {
            let mut chosen = None;
            // Fallback when rounding pushes every continuation just past the
            // threshold: the best continuation of the prefix.
            let mut fallback: Option<(u32, f64, f64)> = None;
            for m in 0..n {
                let tail = f[r][m as usize];
                if !tail.is_finite() {
                    continue;
                }
                let link = match rows.last() {
                    Some(&prev) => self.inter[r - 1][(prev ^ m) as usize],
                    None => 0.0,
                };
                let total = prefix + link + tail;
                if total <= threshold {
                    if chosen.is_some() {
                        multiple = true;
                        break;
                    }
                    chosen = Some((m, link));
                } else if fallback.is_none_or(|fb| total < fb.2) {
                    fallback = Some((m, link, total));
                }
            }
            let (m, link) = chosen.or(fallback.map(|fb| (fb.0, fb.1)))?;
            prefix += link + self.intra[r][m as usize];
            rows.push(m);
        }
        Some((rows, multiple))
    }

    fn spins(&self, rows: &[u32]) -> Vec<i8> {
        rows.iter()
            .flat_map(|&m| (0..self.width).map(move |c| if m >> (self.width - 1 - c) & 1 == 1 { -1 } else { 1 }))
            .collect()
    }
}

/// [`solve`](super::solve) with an explicit width budget.
pub fn solve_with(j: &CouplingConfig, clamp: Option<&Clamp>, opts: &SolverOptions) -> Result<SpinPair> {
    let geom = j.geometry();
    if geom.width() > opts.max_width || geom.width() > 30 {
        return Err(Error::SolverBudget(format!(
            "box width {} exceeds the transfer-matrix limit {}",
            geom.width(),
            opts.max_width.min(30)
        )));
    }
    check_clamp(geom, clamp)?;

    let mut variants = Vec::new();
    match clamp {
        None => {
            let mut forced = Forced::free(geom.height());
            forced.force(geom, 0, 1);
            variants.push(forced);
        }
        Some(c) => {
            for orientation in [1i8, -1] {
                let mut forced = Forced::free(geom.height());
                let ok = c
                    .vertices()
                    .iter()
                    .zip(c.signs())
                    .all(|(&v, s)| forced.force(geom, v, orientation * s.to_i8()))
                    && forced.force(geom, 0, 1);
                if ok {
                    variants.push(forced);
                }
            }
        }
    }

    let rows = Rows::new(j);
    let solved: Vec<(Forced, Vec<Vec<f64>>, f64)> = variants
        .into_iter()
        .map(|forced| {
            let f = rows.cost_to_go(&forced);
            let best = f[0].iter().copied().fold(f64::INFINITY, f64::min);
            (forced, f, best)
        })
        .collect();
    let emin = solved.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    if !emin.is_finite() {
        return Err(Error::Clamp("clamp admits no configuration".into()));
    }
    let threshold = emin + energy_tolerance(emin);

    let mut best: Option<Vec<u32>> = None;
    let mut tie = false;
    for (_, f, e) in &solved {
        if *e > threshold {
            continue;
        }
        let Some((trace, multiple)) = rows.trace(f, threshold) else {
            continue;
        };
        tie |= multiple;
        best = match best {
            None => Some(trace),
            Some(prev) => {
                tie = true;
                Some(prev.min(trace))
            }
        };
    }
    let trace = best.ok_or_else(|| Error::Clamp("no optimal configuration traced".into()))?;
    Ok(SpinPair::from_canonical(j, rows.spins(&trace), tie))
}

#[cfg(test)]
mod tests {
    use super::super::{brute_force, solve, Clamp};
    use crate::disorder::{sample_couplings, DistributionSpec};
    use crate::lattice::build_box;
    use crate::Sign;
    use std::sync::Arc;

    #[test]
    fn matches_brute_force_on_random_3x4() {
        let g = Arc::new(build_box(3, 4).unwrap());
        let dist = DistributionSpec::gaussian(1.0);
        for i in 0..200 {
            let j = sample_couplings(g.clone(), &dist, 2024, i).unwrap();
            let a = solve(&j, None).unwrap();
            let b = brute_force(&j, None).unwrap();
            assert_eq!(a.spins(), b.spins(), "sample {i}");
            assert!((a.energy() - b.energy()).abs() <= 1e-12 * (1.0 + b.energy().abs()));
            assert_eq!(a.tie(), b.tie());
        }
    }

    #[test]
    fn matches_brute_force_on_other_shapes() {
        let dist = DistributionSpec::uniform_symmetric(1.0);
        for (w, h) in [(1, 5), (2, 4), (4, 3), (5, 2), (4, 4)] {
            let g = Arc::new(build_box(w, h).unwrap());
            for i in 0..25 {
                let j = sample_couplings(g.clone(), &dist, 77, i).unwrap();
                assert_eq!(solve(&j, None).unwrap(), brute_force(&j, None).unwrap(), "{w}x{h} #{i}");
            }
        }
    }

    #[test]
    fn clamped_matches_brute_force() {
        let g = Arc::new(build_box(4, 3).unwrap());
        let dist = DistributionSpec::gaussian(1.0);
        for i in 0..40 {
            let j = sample_couplings(g.clone(), &dist, 9, i).unwrap();
            for e in [0usize, 5, 13] {
                for s in [Sign::Plus, Sign::Minus] {
                    let c = Clamp::edge(&g, e, s);
                    let a = solve(&j, Some(&c)).unwrap();
                    assert_eq!(a, brute_force(&j, Some(&c)).unwrap());
                    assert!(c.is_satisfied_by(&a));
                }
            }
            let c = Clamp::new(&[1, 6, 11], &[Sign::Plus, Sign::Minus, Sign::Minus]).unwrap();
            assert_eq!(solve(&j, Some(&c)).unwrap(), brute_force(&j, Some(&c)).unwrap());
        }
    }

    #[test]
    fn ties_on_uniform_couplings() {
        // Ferromagnet: both uniform states collapse to one canonical state.
        let g = Arc::new(build_box(3, 3).unwrap());
        let j = crate::disorder::CouplingConfig::uniform(g.clone(), 1.0).unwrap();
        let s = solve(&j, None).unwrap();
        assert!(!s.tie());
        assert!(s.spins().iter().all(|&x| x == 1));
        // Zero couplings: every configuration is optimal.
        let z = crate::disorder::CouplingConfig::uniform(g, 0.0).unwrap();
        let s = solve(&z, None).unwrap();
        assert!(s.tie());
        assert!(s.spins().iter().all(|&x| x == 1));
    }
}
