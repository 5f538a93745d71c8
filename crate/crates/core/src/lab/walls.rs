//! Tethered-wall statistics over pair proxies.

use std::sync::Arc;

use serde_json::json;

use super::config::{default_proxy_window, EdgeSpec, Experiment, ExperimentConfig};
use super::map_samples;
use super::proxy::{pair_sample, ProxyParams};
use super::report::{Aggregate, AssertionResult, Check, ReportBuilder, SampleOutcome};
use crate::error::Result;
use crate::interface::{count_grid, domain_walls, max_segment_half_width, no_double_tether_check, wall_bound_check};

pub(crate) fn wall_stats(config: &ExperimentConfig) -> Result<ReportBuilder> {
    let Experiment::WallStats {
        proxy,
        edge,
        n_list,
        k_list,
        window,
    } = &config.experiment
    else {
        unreachable!()
    };
    let geom = Arc::new(config.geometry.build()?);
    let params = ProxyParams {
        kind: *proxy,
        edge: edge.unwrap_or_else(|| EdgeSpec::central(&geom)).resolve(&geom)?,
        window: window.unwrap_or_else(|| default_proxy_window(&geom)),
    };
    let ns: Vec<usize> = n_list.clone().unwrap_or_else(|| (1..=max_segment_half_width(&geom)).collect());
    let ks = k_list.clone();
    let mut grid_ks = ks.clone();
    if !grid_ks.contains(&0) {
        grid_ks.insert(0, 0);
    }

    let mut builder = map_samples(config, |index| {
        let pair = pair_sample(&geom, &config.distribution, config.seed, index, &params)?;
        let walls = domain_walls(&pair.interface, &pair.dual);
        let grid = count_grid(&walls, &geom, &pair.dual, &ns, &grid_ks)?;
        let bound = wall_bound_check(&grid)?;
        let tether = no_double_tether_check(&walls, &pair.dual);
        let record = json!({
            "index": index,
            "proxy": proxy.name(),
            "interface_edges": pair.interface.len(),
            "walls": walls.len(),
            "tethered_walls": walls.iter().filter(|w| w.tethered).count(),
            "critical_value": pair.critical_value,
            "counts": grid.counts,
            "bound_violations": bound.violations,
            "shared_vertices": tether.shared_vertices,
            "double_tethers": tether.double_tethers,
        });
        let checks = vec![
            Check::hard("wall_bound", bound.passed(), format!("{:?}", bound.violations)),
            Check::hard(
                "tethered_walls_disjoint",
                tether.shared_vertices.is_empty(),
                format!("{:?}", tether.shared_vertices),
            ),
            Check::hard(
                "no_wall_joins_x_axis",
                tether.double_tethers.is_empty(),
                format!("{:?}", tether.double_tethers),
            ),
        ];
        Ok(SampleOutcome { index, record, checks })
    })?;

    // counts[i][j] per sample -> mean and standard error.
    let mut means = vec![vec![Aggregate::of(&[]); grid_ks.len()]; ns.len()];
    for (i, &n) in ns.iter().enumerate() {
        for (jx, &k) in grid_ks.iter().enumerate() {
            let values = builder.field(&format!("/counts/{i}/{jx}"));
            let a = Aggregate::of(&values);
            means[i][jx] = a;
            if ks.contains(&k) {
                builder.aggregates.insert(format!("N[n={n},k={k}]"), a);
            }
        }
    }
    builder.tables.insert(
        "mean_counts".into(),
        json!({
            "proxy": proxy.name(),
            "n": ns,
            "k": grid_ks,
            "mean": means.iter().map(|r| r.iter().map(|a| a.mean).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "std_error": means.iter().map(|r| r.iter().map(|a| a.std_error).collect::<Vec<_>>()).collect::<Vec<_>>(),
        }),
    );

    let splits = subadditivity(&ns, &grid_ks, &ks, &means);
    let violations: Vec<&serde_json::Value> = splits.iter().filter(|s| s["violated"] == json!(true)).collect();
    builder.extra.push(AssertionResult {
        name: "subadditivity".into(),
        hard: false,
        passed: violations.is_empty(),
        checked: splits.len(),
        failures: violations.len(),
        detail: if splits.is_empty() {
            "no split n1 + n2 = n available in n_list".into()
        } else {
            format!("{} of {} splits exceed two combined standard errors", violations.len(), splits.len())
        },
        reproducer: None,
    });
    builder.tables.insert("subadditivity".into(), json!(splits));
    builder.flags.push(format!("proxy={}", proxy.name()));
    Ok(builder)
}

/// Every split `n1 + n2 = n` with `n1 <= n2` and all three in `ns`.
fn subadditivity(ns: &[usize], grid_ks: &[usize], ks: &[usize], means: &[Vec<Aggregate>]) -> Vec<serde_json::Value> {
    let pos = |n: usize| ns.iter().position(|&x| x == n);
    let mut out = Vec::new();
    for (jx, &k) in grid_ks.iter().enumerate() {
        if !ks.contains(&k) {
            continue;
        }
        for &n in ns {
            for n1 in 1..=n / 2 {
                let n2 = n - n1;
                let (Some(i), Some(i1), Some(i2)) = (pos(n), pos(n1), pos(n2)) else {
                    continue;
                };
                let (a, a1, a2) = (means[i][jx], means[i1][jx], means[i2][jx]);
                let excess = a.mean - a1.mean - a2.mean;
                let se = (a.std_error.powi(2) + a1.std_error.powi(2) + a2.std_error.powi(2)).sqrt();
                out.push(json!({
                    "k": k, "n": n, "n1": n1, "n2": n2,
                    "excess": excess,
                    "combined_std_error": se,
                    "violated": excess > 2.0 * se,
                }));
            }
        }
    }
    out
}
