//! Seeded experiment runs over disorder ensembles.
//!
//! A run maps every sample index through a pure function of
//! `(config, seed, index)` on a worker pool, then folds the outcomes in
//! index order. The report hash therefore does not depend on the number of
//! threads.

pub mod config;
mod experiments;
mod probes;
pub mod proxy;
pub mod report;
mod walls;

use std::time::Instant;

use rayon::prelude::*;

pub use config::{
    default_proxy_window, EdgeSpec, Experiment, ExperimentConfig, GeometrySpec, ProxyKind, WindowSpec, SCHEMA_VERSION,
};
pub use report::{validate_summary, Aggregate, AssertionResult, RunReport};

use crate::error::{Error, Result};
use report::{ReportBuilder, SampleOutcome};

/// Validates `config`, runs the experiment and, if `config.out` is set,
/// writes the report files there.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads())
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let builder = pool.install(|| match &config.experiment {
        Experiment::Solve { .. } => experiments::solve(config),
        Experiment::FlipSweep { .. } => experiments::flip_sweep(config),
        Experiment::TwoBondMap { .. } => experiments::two_bond_map(config),
        Experiment::ContourStats { .. } => experiments::contour_stats(config),
        Experiment::PropertySuite { .. } => experiments::property_suite(config),
        Experiment::WallStats { .. } => walls::wall_stats(config),
        Experiment::Convergence { .. } => probes::convergence(config),
        Experiment::UniquenessProbe { .. } => probes::uniqueness(config),
    })?;
    let report = builder.finish(start.elapsed().as_secs_f64());
    if let Some(dir) = &config.out {
        report.write_to(dir)?;
    }
    Ok(report)
}

/// Runs `f` on every sample index of the config, in parallel, in order.
pub(crate) fn map_samples<F>(config: &ExperimentConfig, f: F) -> Result<ReportBuilder>
where
    F: Fn(u64) -> Result<SampleOutcome> + Sync + Send,
{
    let outcomes = config
        .sample_indices()
        .into_par_iter()
        .map(f)
        .collect::<Result<Vec<_>>>()?;
    Ok(ReportBuilder::new(config.clone(), outcomes))
}
