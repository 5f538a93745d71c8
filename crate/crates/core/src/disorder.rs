//! Coupling realizations: sampling, storage, CSV round-trips and local
//! modifications (including super-satisfaction).
//!
//! Every coupling is drawn from its own ChaCha stream. The 256-bit key is
//! derived from `(master_seed, sample_index)` and the stream id from the
//! edge's absolute coordinates, so a coupling depends only on those three
//! values: not on iteration order, thread count, or the size of the box it
//! is sampled in (wrap edges excepted, they belong to a single width).

use std::io::{Read, Write};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{BoxGeometry, EdgeId, EdgeKey, VertexId};
use crate::Sign;

/// Symmetric, continuous coupling law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    Gaussian {
        #[serde(default)]
        mean: f64,
        sigma: f64,
    },
    Uniform {
        low: f64,
        high: f64,
    },
}

impl DistributionSpec {
    pub fn gaussian(sigma: f64) -> Self {
        DistributionSpec::Gaussian { mean: 0.0, sigma }
    }

    pub fn uniform_symmetric(half_width: f64) -> Self {
        DistributionSpec::Uniform {
            low: -half_width,
            high: half_width,
        }
    }

    /// Rejects laws that are not symmetric about zero or are degenerate.
    pub fn validate(&self) -> Result<()> {
        match *self {
            DistributionSpec::Gaussian { mean, sigma } => {
                if mean != 0.0 {
                    return Err(Error::Distribution(format!("gaussian mean must be 0, got {mean}")));
                }
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(Error::Distribution(format!("gaussian sigma must be positive, got {sigma}")));
                }
            }
            DistributionSpec::Uniform { low, high } => {
                if !(high.is_finite() && high > 0.0) {
                    return Err(Error::Distribution(format!("uniform half-width must be positive, got {high}")));
                }
                if low != -high {
                    return Err(Error::Distribution(format!(
                        "uniform law on [{low}, {high}] is not symmetric about 0"
                    )));
                }
            }
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            DistributionSpec::Gaussian { mean, sigma } => Normal::new(mean, sigma).expect("validated").sample(rng),
            DistributionSpec::Uniform { low, high } => Uniform::new(low, high).expect("validated").sample(rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Provenance {
    Sampled {
        distribution: DistributionSpec,
        master_seed: u64,
        sample_index: u64,
    },
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Modification {
    pub edge: EdgeId,
    pub old: f64,
    pub new: f64,
}

/// One real coupling per edge of a box.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingConfig {
    geometry: Arc<BoxGeometry>,
    values: Arc<[f64]>,
    provenance: Provenance,
    modifications: Vec<Modification>,
}

impl CouplingConfig {
    pub fn from_values(geometry: Arc<BoxGeometry>, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.num_edges() {
            return Err(Error::InvalidArgument(format!(
                "expected {} couplings, got {}",
                geometry.num_edges(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("coupling on edge {i} is not finite")));
        }
        Ok(Self {
            geometry,
            values: values.into(),
            provenance: Provenance::Explicit,
            modifications: Vec::new(),
        })
    }

    /// Every coupling equal to `value`.
    pub fn uniform(geometry: Arc<BoxGeometry>, value: f64) -> Result<Self> {
        let n = geometry.num_edges();
        Self::from_values(geometry, vec![value; n])
    }

    pub fn geometry(&self) -> &Arc<BoxGeometry> {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, e: EdgeId) -> f64 {
        self.values[e]
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn modifications(&self) -> &[Modification] {
        &self.modifications
    }

    pub fn is_modified(&self) -> bool {
        !self.modifications.is_empty()
    }

    /// Copy with `J_e` replaced; the change is appended to the log.
    pub fn with_value(&self, e: EdgeId, value: f64) -> Result<Self> {
        if e >= self.values.len() {
            return Err(Error::InvalidArgument(format!("edge {e} not in geometry")));
        }
        if !value.is_finite() {
            return Err(Error::InvalidArgument(format!("coupling {value} is not finite")));
        }
        let mut values = self.values.to_vec();
        let old = values[e];
        values[e] = value;
        let mut modifications = self.modifications.clone();
        modifications.push(Modification { edge: e, old, new: value });
        Ok(Self {
            geometry: Arc::clone(&self.geometry),
            values: values.into(),
            provenance: self.provenance.clone(),
            modifications,
        })
    }

    /// Copy with several couplings replaced.
    pub fn with_values(&self, changes: &[(EdgeId, f64)]) -> Result<Self> {
        let mut out = self.clone();
        for &(e, v) in changes {
            out = out.with_value(e, v)?;
        }
        Ok(out)
    }

    /// Edges with both endpoints in `set`.
    pub fn interior_edges(&self, set: &[VertexId]) -> Vec<EdgeId> {
        interior_edges(&self.geometry, set)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv write: {e}"));
        for (id, e) in self.geometry.edges().iter().enumerate() {
            let (c1, r1) = self.geometry.coords(e.a);
            let (c2, r2) = self.geometry.coords(e.b);
            w.serialize(CsvRow {
                edge_id: id,
                c1,
                r1,
                c2,
                r2,
                wrap: e.wrap,
                value: format!("{:.16e}", self.values[id]),
            })
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidArgument(format!("csv write: {e}")))?;
        Ok(())
    }

    /// Reads a coupling file written by [`write_csv`](Self::write_csv). Rows may
    /// come in any order but must cover every edge exactly once and agree
    /// with the geometry.
    pub fn read_csv<R: Read>(geometry: Arc<BoxGeometry>, reader: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(reader);
        let mut values = vec![f64::NAN; geometry.num_edges()];
        let mut seen = vec![false; geometry.num_edges()];
        for row in rd.deserialize::<CsvRow>() {
            let row = row.map_err(|e| Error::InvalidArgument(format!("csv read: {e}")))?;
            if row.edge_id >= geometry.num_edges() || seen[row.edge_id] {
                return Err(Error::InvalidArgument(format!("bad or repeated edge id {}", row.edge_id)));
            }
            let e = geometry.edge(row.edge_id);
            let expected = (geometry.coords(e.a), geometry.coords(e.b), e.wrap);
            if expected != ((row.c1, row.r1), (row.c2, row.r2), row.wrap) {
                return Err(Error::InvalidArgument(format!(
                    "edge {} does not match the geometry",
                    row.edge_id
                )));
            }
            values[row.edge_id] = row
                .value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad value {:?}", row.value)))?;
            seen[row.edge_id] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!("edge {missing} missing from csv")));
        }
        Self::from_values(geometry, values)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    edge_id: usize,
    c1: usize,
    r1: usize,
    c2: usize,
    r2: usize,
    wrap: bool,
    value: String,
}

pub fn interior_edges(geom: &BoxGeometry, set: &[VertexId]) -> Vec<EdgeId> {
    let mut out: Vec<EdgeId> = set
        .iter()
        .flat_map(|&v| geom.incident_edges(v).iter().copied())
        .filter(|&e| {
            let edge = geom.edge(e);
            set.contains(&edge.a) && set.contains(&edge.b)
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn mix(words: &[u64]) -> u64 {
    words.iter().fold(0x243f_6a88_85a3_08d3, |h, &w| splitmix64(h ^ splitmix64(w)))
}

/// Stream id of an edge, a pure function of its key.
pub fn edge_stream(key: EdgeKey) -> u64 {
    match key {
        EdgeKey::Plain { x1, y1, x2, y2 } => mix(&[1, x1 as u64, y1 as u64, x2 as u64, y2 as u64]),
        EdgeKey::Wrap { width, y } => mix(&[2, width as u64, y as u64]),
    }
}

/// Generator for one edge of one disorder sample.
pub fn edge_rng(master_seed: u64, sample_index: u64, key: EdgeKey) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    for (i, chunk) in seed.chunks_mut(8).enumerate() {
        chunk.copy_from_slice(&mix(&[master_seed, sample_index, i as u64]).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(edge_stream(key));
    rng
}

/// Auxiliary generator for per-sample random choices (probe edges, clamp
/// signs, perturbations), independent of the coupling streams.
pub fn auxiliary_rng(master_seed: u64, sample_index: u64, purpose: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(&[0xa0c5, master_seed, sample_index, purpose]))
}

/// Seed of an independent ensemble derived from `master_seed`.
pub fn derived_seed(master_seed: u64, purpose: u64) -> u64 {
    mix(&[0x5eed, master_seed, purpose])
}

/// Draws every coupling of `geom` independently from `dist`.
pub fn sample_couplings(
    geom: Arc<BoxGeometry>,
    dist: &DistributionSpec,
    master_seed: u64,
    sample_index: u64,
) -> Result<CouplingConfig> {
    dist.validate()?;
    let values = (0..geom.num_edges())
        .map(|e| dist.draw(&mut edge_rng(master_seed, sample_index, geom.edge_key(e))))
        .collect();
    let mut cfg = CouplingConfig::from_values(geom, values)?;
    cfg.provenance = Provenance::Sampled {
        distribution: *dist,
        master_seed,
        sample_index,
    };
    Ok(cfg)
}

/// `min(Σ_{z≠y} |J_xz|, Σ_{z≠x} |J_yz|)` for `b = <x, y>`: the magnitude
/// `|J_b|` must exceed to force the sign of `σ_x σ_y` in every ground state.
pub fn supersatisfied_threshold(j: &CouplingConfig, b: EdgeId) -> f64 {
    let geom = j.geometry();
    let edge = geom.edge(b);
    let side = |v: VertexId| -> f64 {
        geom.incident_edges(v)
            .iter()
            .filter(|&&e| e != b)
            .map(|&e| j.value(e).abs())
            .sum()
    };
    side(edge.a).min(side(edge.b))
}

pub fn is_supersatisfied(j: &CouplingConfig, b: EdgeId) -> bool {
    j.value(b).abs() > supersatisfied_threshold(j, b)
}

/// Default margin above the threshold.
pub fn default_margin(threshold: f64) -> f64 {
    1e-6 * (1.0 + threshold)
}

/// Sets `J_b := s · (threshold + margin)`.
pub fn super_satisfy(j: &CouplingConfig, b: EdgeId, sign: Sign, margin: f64) -> Result<CouplingConfig> {
    if margin.is_nan() || margin <= 0.0 {
        return Err(Error::InvalidArgument(format!("margin must be positive, got {margin}")));
    }
    if b >= j.geometry().num_edges() {
        return Err(Error::InvalidArgument(format!("edge {b} not in geometry")));
    }
    let t = supersatisfied_threshold(j, b);
    j.with_value(b, sign.value() * (t + margin))
}
