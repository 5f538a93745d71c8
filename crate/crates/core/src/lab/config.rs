//! Experiment configuration files (TOML, versioned schema).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::disorder::DistributionSpec;
use crate::error::{Error, Result};
use crate::lattice::{build_box, square_box, BoxGeometry, EdgeId, EdgeKind};
use crate::solver::DEFAULT_MAX_WIDTH;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub seed: u64,
    pub samples: usize,
    /// Index of the first sample; lets a single failing sample be replayed.
    #[serde(default)]
    pub first_sample: u64,
    #[serde(default)]
    pub parallel: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub geometry: GeometrySpec,
    #[serde(default = "default_distribution")]
    pub distribution: DistributionSpec,
    pub experiment: Experiment,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_distribution() -> DistributionSpec {
    DistributionSpec::gaussian(1.0)
}

/// Either `n` (the square box `[-n, n] × [0, 2n]`) or an explicit `width`/`height`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<usize>,
}

impl GeometrySpec {
    pub fn square(n: usize) -> Self {
        Self {
            n: Some(n),
            ..Self::default()
        }
    }

    pub fn rect(width: usize, height: usize) -> Self {
        Self {
            n: None,
            width: Some(width),
            height: Some(height),
        }
    }

    pub fn build(&self) -> Result<BoxGeometry> {
        match (self.n, self.width, self.height) {
            (Some(n), None, None) => square_box(n),
            (None, Some(w), Some(h)) => build_box(w, h),
            _ => Err(Error::InvalidArgument(
                "geometry needs either `n` or both `width` and `height`".into(),
            )),
        }
    }
}

/// An edge named by the absolute abscissa and row of its lower/left endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub x: i64,
    pub y: usize,
    pub kind: EdgeKind,
}

impl EdgeSpec {
    pub fn horizontal(x: i64, y: usize) -> Self {
        Self {
            x,
            y,
            kind: EdgeKind::Horizontal,
        }
    }

    pub fn vertical(x: i64, y: usize) -> Self {
        Self {
            x,
            y,
            kind: EdgeKind::Vertical,
        }
    }

    /// Horizontal edge from abscissa 0 to 1 in the middle row.
    pub fn central(geom: &BoxGeometry) -> Self {
        Self::horizontal(0, geom.height() / 2)
    }

    pub fn resolve(&self, geom: &BoxGeometry) -> Result<EdgeId> {
        geom.column_of(self.x)
            .and_then(|c| geom.edge_at(c, self.y, self.kind))
            .ok_or_else(|| {
                Error::Geometry(format!(
                    "no {:?} edge at ({}, {}) in a {}x{} box",
                    self.kind,
                    self.x,
                    self.y,
                    geom.width(),
                    geom.height()
                ))
            })
    }
}

/// A bottom-aligned, horizontally centered sub-box, given by its size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub width: usize,
    pub height: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self { width: 3, height: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxyKind {
    /// The two excited states of an edge, at the critical value.
    CriticalContour,
    /// Ground states of two nested boxes, compared on a common window.
    NestedVolumes,
    /// Ground states of the same couplings and of a copy resampled outside a window.
    Resampled,
}

impl ProxyKind {
    pub const ALL: [ProxyKind; 3] = [ProxyKind::CriticalContour, ProxyKind::NestedVolumes, ProxyKind::Resampled];

    pub fn name(self) -> &'static str {
        match self {
            ProxyKind::CriticalContour => "critical_contour",
            ProxyKind::NestedVolumes => "nested_volumes",
            ProxyKind::Resampled => "resampled",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Solve {
        #[serde(default = "yes")]
        verify: bool,
        #[serde(default = "three")]
        max_subset_size: usize,
        #[serde(default = "six")]
        max_dual_len: usize,
    },
    FlipSweep {
        #[serde(default)]
        edge: Option<EdgeSpec>,
        #[serde(default = "forty_one")]
        points: usize,
        #[serde(default = "tolerance")]
        tolerance: f64,
    },
    TwoBondMap {
        b: EdgeSpec,
        e: EdgeSpec,
        #[serde(default = "forty_one")]
        grid: usize,
        #[serde(default = "tolerance")]
        tolerance: f64,
    },
    ContourStats {
        #[serde(default)]
        edge: Option<EdgeSpec>,
    },
    WallStats {
        proxy: ProxyKind,
        #[serde(default)]
        edge: Option<EdgeSpec>,
        #[serde(default)]
        n_list: Option<Vec<usize>>,
        #[serde(default = "default_k_list")]
        k_list: Vec<usize>,
        /// Comparison window of the nested and resampled proxies; defaults
        /// to the box shrunk by one column on each side and one row on top.
        #[serde(default)]
        window: Option<WindowSpec>,
    },
    Convergence {
        #[serde(default)]
        window: WindowSpec,
        n_list: Vec<usize>,
    },
    UniquenessProbe {
        #[serde(default)]
        window: WindowSpec,
        pairs: Vec<(usize, usize)>,
    },
    PropertySuite {
        #[serde(default = "tolerance")]
        tolerance: f64,
        #[serde(default = "ten")]
        probes: usize,
    },
}

fn yes() -> bool {
    true
}
fn three() -> usize {
    3
}
fn six() -> usize {
    6
}
fn ten() -> usize {
    10
}
fn forty_one() -> usize {
    41
}
fn tolerance() -> f64 {
    1e-9
}
fn default_k_list() -> Vec<usize> {
    vec![0, 1, 2, 3, 4]
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Solve { .. } => "solve",
            Experiment::FlipSweep { .. } => "flip_sweep",
            Experiment::TwoBondMap { .. } => "two_bond_map",
            Experiment::ContourStats { .. } => "contour_stats",
            Experiment::WallStats { .. } => "wall_stats",
            Experiment::Convergence { .. } => "convergence",
            Experiment::UniquenessProbe { .. } => "uniqueness_probe",
            Experiment::PropertySuite { .. } => "property_suite",
        }
    }

    /// Defaults for a subcommand invoked without a config file.
    pub fn default_for(kind: &str) -> Result<Self> {
        Ok(match kind {
            "solve" => Experiment::Solve {
                verify: true,
                max_subset_size: 3,
                max_dual_len: 6,
            },
            "flip_sweep" => Experiment::FlipSweep {
                edge: None,
                points: 41,
                tolerance: 1e-9,
            },
            "two_bond_map" => Experiment::TwoBondMap {
                b: EdgeSpec::horizontal(0, 1),
                e: EdgeSpec::vertical(1, 1),
                grid: 41,
                tolerance: 1e-9,
            },
            "contour_stats" => Experiment::ContourStats { edge: None },
            "wall_stats" => Experiment::WallStats {
                proxy: ProxyKind::CriticalContour,
                edge: None,
                n_list: None,
                k_list: default_k_list(),
                window: None,
            },
            "convergence" => Experiment::Convergence {
                window: WindowSpec::default(),
                n_list: vec![2, 3, 4, 5, 6],
            },
            "uniqueness_probe" => Experiment::UniquenessProbe {
                window: WindowSpec::default(),
                pairs: vec![(2, 3), (3, 4), (4, 5)],
            },
            "property_suite" => Experiment::PropertySuite {
                tolerance: 1e-9,
                probes: 10,
            },
            other => return Err(Error::InvalidArgument(format!("unknown experiment kind `{other}`"))),
        })
    }
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, geometry: GeometrySpec, seed: u64, samples: usize) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed,
            samples,
            first_sample: 0,
            parallel: None,
            out: None,
            geometry,
            distribution: default_distribution(),
            experiment,
        }
    }

    /// Built-in defaults for a subcommand.
    pub fn default_for(kind: &str) -> Result<Self> {
        let experiment = Experiment::default_for(kind)?;
        let (geometry, samples) = match kind {
            "wall_stats" => (GeometrySpec::square(7), 500),
            "two_bond_map" => (GeometrySpec::square(1), 200),
            "convergence" | "uniqueness_probe" => (GeometrySpec::square(2), 200),
            "property_suite" => (GeometrySpec::square(3), 100),
            _ => (GeometrySpec::square(2), 100),
        };
        Ok(Self::new(experiment, geometry, 1, samples))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidArgument(format!("config: {e}")))
    }

    pub fn threads(&self) -> usize {
        self.parallel.unwrap_or(1).max(1)
    }

    /// The sample indices this run covers.
    pub fn sample_indices(&self) -> std::ops::Range<u64> {
        self.first_sample..self.first_sample + self.samples as u64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if self.parallel == Some(0) {
            return bad("parallel must be at least 1".into());
        }
        self.distribution.validate()?;
        let geom = self.geometry.build()?;
        let max_width = |w: usize| -> Result<()> {
            if w > DEFAULT_MAX_WIDTH {
                return Err(Error::SolverBudget(format!(
                    "box width {w} exceeds the solver limit {DEFAULT_MAX_WIDTH}"
                )));
            }
            Ok(())
        };
        match &self.experiment {
            Experiment::Convergence { window, n_list } => {
                if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("n_list must be non-empty and strictly increasing".into());
                }
                check_window(window, n_list[0])?;
                max_width(2 * n_list[n_list.len() - 1] + 1)?;
            }
            Experiment::UniquenessProbe { window, pairs } => {
                if pairs.is_empty() {
                    return bad("pairs must be non-empty".into());
                }
                for &(a, b) in pairs {
                    check_window(window, a.min(b))?;
                    max_width(2 * a.max(b) + 1)?;
                }
            }
            Experiment::TwoBondMap { b, e, grid, tolerance } => {
                max_width(geom.width())?;
                if *grid < 11 {
                    return bad(format!("grid must be at least 11 points per axis, got {grid}"));
                }
                if tolerance.is_nan() || *tolerance <= 0.0 {
                    return bad("tolerance must be positive".into());
                }
                if b.resolve(&geom)? == e.resolve(&geom)? {
                    return bad("edges b and e must differ".into());
                }
            }
            Experiment::FlipSweep { edge, points, tolerance } => {
                max_width(geom.width())?;
                if *points < 2 {
                    return bad("points must be at least 2".into());
                }
                if tolerance.is_nan() || *tolerance <= 0.0 {
                    return bad("tolerance must be positive".into());
                }
                edge.unwrap_or_else(|| EdgeSpec::central(&geom)).resolve(&geom)?;
            }
            Experiment::ContourStats { edge } => {
                max_width(geom.width())?;
                edge.unwrap_or_else(|| EdgeSpec::central(&geom)).resolve(&geom)?;
            }
            Experiment::WallStats {
                proxy,
                edge,
                n_list,
                k_list,
                window,
            } => {
                max_width(geom.width())?;
                edge.unwrap_or_else(|| EdgeSpec::central(&geom)).resolve(&geom)?;
                let half = crate::interface::max_segment_half_width(&geom);
                let ns = n_list.clone().unwrap_or_else(|| (1..=half).collect());
                if ns.is_empty() || ns.iter().any(|&n| n == 0 || n > half) {
                    return bad(format!("n_list entries must lie in 1..={half}"));
                }
                if k_list.is_empty() || k_list.iter().any(|&k| k > geom.height()) {
                    return bad(format!("k_list entries must lie in 0..={}", geom.height()));
                }
                if *proxy != ProxyKind::CriticalContour {
                    let w = window.unwrap_or_else(|| default_proxy_window(&geom));
                    if w.width + 2 > geom.width() || w.height + 1 > geom.height() || w.width == 0 || w.height == 0 {
                        return bad(format!(
                            "window {}x{} must leave a margin inside the {}x{} box",
                            w.width,
                            w.height,
                            geom.width(),
                            geom.height()
                        ));
                    }
                }
            }
            Experiment::Solve { max_subset_size, max_dual_len, .. } => {
                max_width(geom.width())?;
                if *max_subset_size == 0 || *max_dual_len == 0 {
                    return bad("verification bounds must be positive".into());
                }
            }
            Experiment::PropertySuite { tolerance, probes } => {
                max_width(geom.width())?;
                if tolerance.is_nan() || *tolerance <= 0.0 || *probes == 0 {
                    return bad("tolerance and probes must be positive".into());
                }
                if geom.width() < 3 || geom.height() < 3 {
                    return bad("property suite needs at least a 3x3 box".into());
                }
            }
        }
        Ok(())
    }
}

/// Window used by the nested and resampled proxies when none is given.
pub fn default_proxy_window(geom: &BoxGeometry) -> WindowSpec {
    WindowSpec {
        width: geom.width().saturating_sub(2),
        height: geom.height().saturating_sub(1),
    }
}

fn check_window(window: &WindowSpec, n: usize) -> Result<()> {
    let side = 2 * n + 1;
    if window.width == 0 || window.height == 0 || window.width >= side || window.height > side {
        return Err(Error::InvalidArgument(format!(
            "window {}x{} does not fit strictly inside the box of n = {n}",
            window.width, window.height
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const WALLS: &str = r#"
        seed = 7
        samples = 20
        parallel = 2

        [geometry]
        n = 3

        [distribution]
        kind = "gaussian"
        sigma = 1.0

        [experiment]
        kind = "wall_stats"
        proxy = "nested_volumes"
        k_list = [0, 1, 2]
    "#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml_str(WALLS).unwrap();
        assert_eq!(cfg.samples, 20);
        assert_eq!(cfg.experiment.kind(), "wall_stats");
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_zero_samples_and_asymmetric_laws() {
        let zero = WALLS.replace("samples = 20", "samples = 0");
        assert!(ExperimentConfig::from_toml_str(&zero).is_err());
        let skew = WALLS.replace("kind = \"gaussian\"\n        sigma = 1.0", "kind = \"uniform\"\n        low = 0.9\n        high = 1.1");
        assert!(matches!(ExperimentConfig::from_toml_str(&skew), Err(Error::Distribution(_))));
    }

    #[test]
    fn rejects_unknown_fields_and_versions() {
        assert!(ExperimentConfig::from_toml_str(&WALLS.replace("seed = 7", "seed = 7\nbogus = 1")).is_err());
        assert!(ExperimentConfig::from_toml_str(&WALLS.replace("seed = 7", "schema_version = 2\nseed = 7")).is_err());
    }

    #[test]
    fn budgets_are_checked() {
        let mut cfg = ExperimentConfig::default_for("convergence").unwrap();
        cfg.experiment = Experiment::Convergence {
            window: WindowSpec::default(),
            n_list: vec![2, 9],
        };
        assert!(matches!(cfg.validate(), Err(Error::SolverBudget(_))));
        cfg.experiment = Experiment::Convergence {
            window: WindowSpec { width: 5, height: 2 },
            n_list: vec![2, 3],
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn every_default_validates() {
        for kind in [
            "solve",
            "flip_sweep",
            "two_bond_map",
            "contour_stats",
            "wall_stats",
            "convergence",
            "uniqueness_probe",
            "property_suite",
        ] {
            ExperimentConfig::default_for(kind).unwrap().validate().unwrap();
        }
    }
}
