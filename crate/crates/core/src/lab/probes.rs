//! Window agreement of ground states across nested volumes.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::json;

use super::config::{Experiment, ExperimentConfig, WindowSpec};
use super::map_samples;
use super::proxy::window_keys;
use super::report::{ReportBuilder, SampleOutcome};
use crate::disorder::sample_couplings;
use crate::error::{Error, Result};
use crate::lattice::{square_box, EdgeKey};
use crate::solver::solve;

/// `σ_x σ_y` on each window edge of the ground state of box `n`, as `+`/`-`.
fn window_signs(config: &ExperimentConfig, n: usize, keys: &[EdgeKey], index: u64) -> Result<String> {
    let geom = Arc::new(square_box(n)?);
    let j = sample_couplings(geom.clone(), &config.distribution, config.seed, index)?;
    let s = solve(&j, None)?;
    keys.iter()
        .map(|&k| {
            let e = geom
                .edge_by_key(k)
                .ok_or_else(|| Error::Geometry(format!("window edge {k:?} missing from box n = {n}")))?;
            Ok(s.edge_sign(&geom, e).symbol())
        })
        .collect()
}

fn key_json(k: &EdgeKey) -> serde_json::Value {
    match *k {
        EdgeKey::Plain { x1, y1, x2, y2 } => json!([x1, y1, x2, y2]),
        EdgeKey::Wrap { width, y } => json!({"wrap": width, "y": y}),
    }
}

fn keys_for(window: &WindowSpec, n: usize) -> Result<Vec<EdgeKey>> {
    window_keys(&square_box(n)?, window)
}

/// Disagreeing window edges between two sign strings, as absolute keys.
fn dump(keys: &[EdgeKey], a: &str, b: &str) -> Vec<serde_json::Value> {
    keys.iter()
        .zip(a.chars().zip(b.chars()))
        .filter(|(_, (x, y))| x != y)
        .map(|(k, _)| key_json(k))
        .collect()
}

pub(crate) fn convergence(config: &ExperimentConfig) -> Result<ReportBuilder> {
    let Experiment::Convergence { window, n_list } = &config.experiment else {
        unreachable!()
    };
    let keys = keys_for(window, n_list[0])?;
    let mut builder = map_samples(config, |index| {
        let signs = n_list
            .iter()
            .map(|&n| window_signs(config, n, &keys, index))
            .collect::<Result<Vec<_>>>()?;
        let disagree: Vec<bool> = signs.windows(2).map(|w| w[0] != w[1]).collect();
        let interfaces: Vec<_> = signs.windows(2).map(|w| dump(&keys, &w[0], &w[1])).collect();
        Ok(SampleOutcome {
            index,
            record: json!({
                "index": index,
                "n": n_list,
                "window_signs": signs,
                "disagree": disagree,
                "interfaces": interfaces,
            }),
            checks: Vec::new(),
        })
    })?;
    if n_list.len() < 2 {
        builder.flags.push("insufficient levels".into());
    }
    let mut trend = Vec::new();
    let mut previous: Option<f64> = None;
    for (i, w) in n_list.windows(2).enumerate() {
        let hits = builder
            .outcomes
            .iter()
            .filter(|o| o.record["disagree"][i] == json!(true))
            .count();
        let name = format!("disagree[n={}->{}]", w[0], w[1]);
        builder.proportion(name, hits, builder.outcomes.len());
        let a = super::report::Aggregate::proportion(hits, builder.outcomes.len());
        trend.push(json!({
            "n": w[0],
            "n_next": w[1],
            "frequency": a.mean,
            "std_error": a.std_error,
            "nonincreasing": previous.is_none_or(|p| a.mean <= p),
        }));
        previous = Some(a.mean);
    }
    builder.tables.insert(
        "trend".into(),
        json!({"window": window, "edges": keys.iter().map(key_json).collect::<Vec<_>>(), "rows": trend}),
    );
    Ok(builder)
}

pub(crate) fn uniqueness(config: &ExperimentConfig) -> Result<ReportBuilder> {
    let Experiment::UniquenessProbe { window, pairs } = &config.experiment else {
        unreachable!()
    };
    let smallest = pairs.iter().map(|&(a, b)| a.min(b)).min().expect("validated non-empty");
    let keys = keys_for(window, smallest)?;
    let mut levels: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    levels.sort_unstable();
    levels.dedup();

    let mut builder = map_samples(config, |index| {
        let signs: BTreeMap<usize, String> = levels
            .iter()
            .map(|&n| Ok((n, window_signs(config, n, &keys, index)?)))
            .collect::<Result<_>>()?;
        let per_pair: Vec<_> = pairs
            .iter()
            .map(|&(a, b)| {
                let (sa, sb) = (&signs[&a], &signs[&b]);
                json!({
                    "n": a,
                    "n_prime": b,
                    "disagree": sa != sb,
                    "interface": dump(&keys, sa, sb),
                })
            })
            .collect();
        Ok(SampleOutcome {
            index,
            record: json!({"index": index, "window_signs": signs, "pairs": per_pair}),
            checks: Vec::new(),
        })
    })?;

    let mut rows = Vec::new();
    for (i, &(a, b)) in pairs.iter().enumerate() {
        let hits = builder
            .outcomes
            .iter()
            .filter(|o| o.record["pairs"][i]["disagree"] == json!(true))
            .count();
        let agg = super::report::Aggregate::proportion(hits, builder.outcomes.len());
        builder.aggregates.insert(format!("disagree[n={a},n'={b}]"), agg);
        rows.push((a.min(b), a, b, agg));
    }
    rows.sort_by_key(|r| (r.0, r.1, r.2));
    let mut previous: Option<f64> = None;
    let table: Vec<_> = rows
        .iter()
        .map(|&(m, a, b, agg)| {
            let row = json!({
                "min_n": m, "n": a, "n_prime": b,
                "frequency": agg.mean, "std_error": agg.std_error,
                "nonincreasing": previous.is_none_or(|p| agg.mean <= p),
            });
            previous = Some(agg.mean);
            row
        })
        .collect();
    builder.tables.insert(
        "trend".into(),
        json!({"window": window, "edges": keys.iter().map(key_json).collect::<Vec<_>>(), "rows": table}),
    );
    Ok(builder)
}
