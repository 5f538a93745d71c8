//! Per-sample drivers for the single-box experiments.

use std::sync::Arc;

use rand::Rng;
use serde_json::json;

use super::config::{EdgeSpec, Experiment, ExperimentConfig};
use super::map_samples;
use super::report::{Check, ReportBuilder, SampleOutcome};
use crate::disorder::{auxiliary_rng, default_margin, sample_couplings, super_satisfy, supersatisfied_threshold, CouplingConfig};
use crate::error::Result;
use crate::excitation::{
    bond_excitation, consistency_check, critical_contour, critical_value, excitation, flip_census, label_grid,
    locate_flip_point, two_bond_critical_set, CaseKind,
};
use crate::interface::{domain_walls, no_double_tether_check};
use crate::lattice::{build_dual, BoxGeometry, EdgeId, EdgeKind, VertexId};
use crate::solver::{solve as ground_state, verify_gsp, Clamp, VerifyOptions};
use crate::Sign;

fn couplings(config: &ExperimentConfig, geom: &Arc<BoxGeometry>, index: u64) -> Result<CouplingConfig> {
    sample_couplings(geom.clone(), &config.distribution, config.seed, index)
}

pub(crate) fn solve(config: &ExperimentConfig) -> Result<ReportBuilder> {
    let Experiment::Solve {
        verify,
        max_subset_size,
        max_dual_len,
    } = &config.experiment
    else {
        unreachable!()
    };
    let geom = Arc::new(config.geometry.build()?);
    let opts = VerifyOptions {
        max_subset_size: *max_subset_size,
        max_dual_len: *max_dual_len,
        ..VerifyOptions::default()
    };
    let mut builder = map_samples(config, |index| {
        let j = couplings(config, &geom, index)?;
        let s = ground_state(&j, None)?;
        let mut checks = Vec::new();
        let mut verification = serde_json::Value::Null;
        if *verify {
            let r = verify_gsp(&j, &s, &opts)?;
            checks.push(Check::hard(
                "gsp_verified",
                r.passed(),
                format!("{} subset and {} walk violations", r.subset_violations.len(), r.walk_violations.len()),
            ));
            verification = json!({
                "subsets_checked": r.subsets_checked,
                "walks_checked": r.walks_checked,
                "subset_violations": r.subset_violations,
                "walk_violations": r.walk_violations,
            });
        }
        Ok(SampleOutcome {
            index,
            record: json!({
                "index": index,
                "energy": s.energy(),
                "energy_per_spin": s.energy() / geom.num_vertices() as f64,
                "tie": s.tie(),
                "spins": s.pattern(),
                "verification": verification,
            }),
            checks,
        })
    })?;
    let e = builder.field("/energy_per_spin");
    builder.aggregate("energy_per_spin", &e);
    let ties = builder.outcomes.iter().filter(|o| o.record["tie"] == json!(true)).count();
    builder.proportion("tie_fraction", ties, builder.outcomes.len());
    Ok(builder)
}

pub(crate) fn flip_sweep(config: &ExperimentConfig) -> Result<ReportBuilder> {
    let Experiment::FlipSweep { edge, points, tolerance } = &config.experiment else {
        unreachable!()
    };
    let geom = Arc::new(config.geometry.build()?);
    let b = edge.unwrap_or_else(|| EdgeSpec::central(&geom)).resolve(&geom)?;
    let mut builder = map_samples(config, |index| {
        let j = couplings(config, &geom, index)?;
        let x = bond_excitation(&j, b)?;
        let c = x.critical_value;
        let flip = locate_flip_point(&j, b)?;
        // Grid around C, shifted by a quarter step so C is never a grid point.
        let half = 1.0 + c.abs();
        let step = 2.0 * half / (*points as f64);
        let grid: Vec<f64> = (0..*points).map(|i| c - half + step * (i as f64 + 0.25)).collect();
        let census = flip_census(&j, b, &grid)?;
        let located = census.transitions.len() == 1 && {
            let t = census.transitions[0];
            grid[t] < c && c < grid[t + 1] && census.labels[t] == Sign::Minus
        };
        let c_moved = critical_value(&j.with_value(b, j.value(b) + 1.7)?, b)?;
        let offset = 1e-6;
        let above = ground_state(&j.with_value(b, c + offset)?, None)?;
        let below = ground_state(&j.with_value(b, c - offset)?, None)?;
        let checks = vec![
            Check::hard(
                "critical_value_matches_bisection",
                (flip.midpoint() - c).abs() <= *tolerance,
                format!("C = {c}, bisection [{}, {}]", flip.lo, flip.hi),
            ),
            Check::hard("single_transition_at_c", located, format!("transitions {:?}", census.transitions)),
            Check::hard(
                "critical_value_independent_of_edge",
                (c_moved - c).abs() <= 1e-12,
                format!("C = {c}, after change {c_moved}"),
            ),
            Check::hard(
                "gsp_selection",
                above.same_state(&x.plus) && below.same_state(&x.minus),
                format!("offset {offset}"),
            ),
        ];
        Ok(SampleOutcome {
            index,
            record: json!({
                "index": index,
                "edge": b,
                "j_b": j.value(b),
                "critical_value": c,
                "bisection": flip,
                "transitions": census.transitions,
                "ground_state_sign": if j.value(b) > c { "+" } else { "-" },
            }),
            checks,
        })
    })?;
    let c = builder.field("/critical_value");
    builder.aggregate("critical_value", &c);
    let abs: Vec<f64> = c.iter().map(|x| x.abs()).collect();
    builder.aggregate("abs_critical_value", &abs);
    Ok(builder)
}

pub(crate) fn two_bond_map(config: &ExperimentConfig) -> Result<ReportBuilder> {
    let Experiment::TwoBondMap { b, e, grid, tolerance } = &config.experiment else {
        unreachable!()
    };
    let geom = Arc::new(config.geometry.build()?);
    let (b, e) = (b.resolve(&geom)?, e.resolve(&geom)?);
    let mut builder = map_samples(config, |index| {
        let j = couplings(config, &geom, index)?;
        let set = two_bond_critical_set(&j, b, e)?;
        let (xs, ys) = set.grid_axes(*grid);
        let cell = (xs[1] - xs[0]).max(ys[1] - ys[0]);
        let labels = label_grid(&j, b, e, &xs, &ys)?;
        let mut checked = 0usize;
        let mut mismatches = Vec::new();
        let mut agreement = Vec::with_capacity(xs.len());
        for (a, &x) in xs.iter().enumerate() {
            let mut row = String::with_capacity(ys.len());
            for (c, &y) in ys.iter().enumerate() {
                let predicted = set.label_at(x, y);
                let near = set.distance(x, y) < cell;
                row.push(if labels[a][c] == predicted {
                    '.'
                } else if near {
                    'b'
                } else {
                    'X'
                });
                if !near {
                    checked += 1;
                    if labels[a][c] != predicted {
                        mismatches.push([x, y]);
                    }
                }
            }
            agreement.push(row);
        }
        let consistency = consistency_check(&j, b, e)?;
        let residual = set.identity_residual();
        let checks = vec![
            Check::hard("constants_identity", residual.abs() <= *tolerance, format!("residual {residual:e}")),
            Check::hard(
                "grid_matches_critical_set",
                mismatches.is_empty(),
                format!("{} of {checked} off-boundary cells disagree, first {:?}", mismatches.len(), mismatches.first()),
            ),
            Check::hard(
                "piecewise_critical_values",
                consistency.passed(*tolerance),
                format!("max error {:e}", consistency.max_error),
            ),
        ];
        Ok(SampleOutcome {
            index,
            record: json!({
                "index": index,
                "set": set,
                "cell": cell,
                "cells_checked": checked,
                "mismatches": mismatches.len(),
                "agreement": agreement,
                "consistency_max_error": consistency.max_error,
            }),
            checks,
        })
    })?;
    let total = builder.outcomes.len();
    let mut freqs = serde_json::Map::new();
    for (case, name) in [
        (CaseKind::Cross, "cross"),
        (CaseKind::PositiveDiag, "positive_diag"),
        (CaseKind::NegativeDiag, "negative_diag"),
    ] {
        let hits = builder
            .outcomes
            .iter()
            .filter(|o| o.record["set"]["case"] == json!(case))
            .count();
        builder.proportion(format!("case[{name}]"), hits, total);
        freqs.insert(name.into(), json!(hits as f64 / total as f64));
    }
    builder.tables.insert("case_frequencies".into(), serde_json::Value::Object(freqs));
    let m = builder.field("/mismatches");
    builder.aggregate("mismatches", &m);
    Ok(builder)
}

pub(crate) fn contour_stats(config: &ExperimentConfig) -> Result<ReportBuilder> {
    let Experiment::ContourStats { edge } = &config.experiment else {
        unreachable!()
    };
    let geom = Arc::new(config.geometry.build()?);
    let dual = build_dual(&geom);
    let b = edge.unwrap_or_else(|| EdgeSpec::central(&geom)).resolve(&geom)?;
    let mut builder = map_samples(config, |index| {
        let j = couplings(config, &geom, index)?;
        let contour = critical_contour(&j, &dual, b)?;
        let walls = domain_walls(&contour, &dual);
        let tether = no_double_tether_check(&walls, &dual);
        let checks = vec![
            Check::hard("contour_contains_edge", contour.contains(b), "dual edge of b missing"),
            Check::hard("no_double_tether", tether.passed(), format!("{:?}", tether.double_tethers)),
        ];
        Ok(SampleOutcome {
            index,
            record: json!({
                "index": index,
                "edge": b,
                "contour_size": contour.len(),
                "walls": walls.len(),
                "tethered_walls": walls.iter().filter(|w| w.tethered).count(),
                "touches_x_axis": contour.vertices.iter().any(|&v| dual.is_x_axis(v)),
                "reaches_top": contour.vertices.iter().any(|&v| dual.is_top(v)),
                "contour": contour.edges,
            }),
            checks,
        })
    })?;
    for field in ["contour_size", "walls", "tethered_walls"] {
        let v = builder.field(&format!("/{field}"));
        builder.aggregate(field, &v);
    }
    let touching = builder.outcomes.iter().filter(|o| o.record["touches_x_axis"] == json!(true)).count();
    builder.proportion("touches_x_axis", touching, builder.outcomes.len());
    Ok(builder)
}

/// Distinct random vertices.
fn random_vertices(rng: &mut impl Rng, n: usize, k: usize) -> Vec<VertexId> {
    let mut all: Vec<VertexId> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        all.swap(i, j);
    }
    all.truncate(k);
    all
}

fn random_clamp(rng: &mut impl Rng, vertices: &[VertexId]) -> Result<Clamp> {
    let signs: Vec<Sign> = vertices
        .iter()
        .map(|_| if rng.random::<bool>() { Sign::Plus } else { Sign::Minus })
        .collect();
    Clamp::new(vertices, &signs)
}

pub(crate) fn property_suite(config: &ExperimentConfig) -> Result<ReportBuilder> {
    let Experiment::PropertySuite { tolerance, probes } = &config.experiment else {
        unreachable!()
    };
    let tol = *tolerance;
    let geom = Arc::new(config.geometry.build()?);
    let dual = build_dual(&geom);
    let b = EdgeSpec::central(&geom).resolve(&geom)?;
    let (bx, by) = geom.coords(geom.edge(b).b);
    let e = geom.edge_at(bx, by, EdgeKind::Vertical).unwrap_or(b + 1);
    let builder = map_samples(config, |index| {
        let j = couplings(config, &geom, index)?;
        let mut rng = auxiliary_rng(config.seed, index, 1);
        let mut checks = Vec::new();

        let gs = ground_state(&j, None)?;
        let r = verify_gsp(&j, &gs, &VerifyOptions::default())?;
        checks.push(Check::hard("gsp_verified", r.passed(), format!("{r:?}")));

        // Single-bond critical value.
        let x = bond_excitation(&j, b)?;
        let c = x.critical_value;
        let flip = locate_flip_point(&j, b)?;
        checks.push(Check::hard(
            "critical_value_matches_bisection",
            (flip.midpoint() - c).abs() <= tol,
            format!("C = {c}, bisection {flip:?}"),
        ));
        let c_moved = critical_value(&j.with_value(b, rng.random_range(-3.0..3.0))?, b)?;
        checks.push(Check::hard(
            "critical_value_independent_of_edge",
            (c_moved - c).abs() <= 1e-12,
            format!("{c} vs {c_moved}"),
        ));
        let delta = 1e-9 * (1.0 + c.abs());
        let above = ground_state(&j.with_value(b, c + 2.0 * delta)?, None)?;
        let below = ground_state(&j.with_value(b, c - 2.0 * delta)?, None)?;
        checks.push(Check::hard(
            "gsp_selection",
            above.same_state(&x.plus) && below.same_state(&x.minus),
            format!("C = {c}"),
        ));

        // Exterior excitation energies on a random set.
        let k = rng.random_range(2..=4);
        let a = random_vertices(&mut rng, geom.num_vertices(), k);
        let (e1, e2, e3) = (random_clamp(&mut rng, &a)?, random_clamp(&mut rng, &a)?, random_clamp(&mut rng, &a)?);
        let r12 = excitation(&j, &e1, &e2)?;
        let r23 = excitation(&j, &e2, &e3)?;
        let r13 = excitation(&j, &e1, &e3)?;
        let r21 = excitation(&j, &e2, &e1)?;
        let additivity = (r12.delta_e_ext + r23.delta_e_ext - r13.delta_e_ext).abs();
        checks.push(Check::hard("ext_additivity", additivity <= tol, format!("residual {additivity:e}")));
        checks.push(Check::hard(
            "ext_antisymmetry",
            (r12.delta_e_ext + r21.delta_e_ext).abs() <= tol,
            format!("{} vs {}", r12.delta_e_ext, r21.delta_e_ext),
        ));
        checks.push(Check::hard(
            "energy_decomposition",
            (r12.delta_e - r12.delta_e_ext - r12.h_interior).abs() <= tol,
            format!("{r12:?}"),
        ));
        let interior: Vec<(EdgeId, f64)> = j
            .interior_edges(&a)
            .into_iter()
            .map(|x| (x, rng.random_range(-3.0..3.0)))
            .collect();
        let k2 = j.with_values(&interior)?;
        let s12 = excitation(&k2, &e1, &e2)?;
        checks.push(Check::hard(
            "interior_independence",
            s12.state.spins() == r12.state.spins()
                && s12.state_prime.spins() == r12.state_prime.spins()
                && s12.delta_e_ext == r12.delta_e_ext,
            format!("{} interior edges re-drawn", interior.len()),
        ));
        let protected = VerifyOptions {
            protected: Some(a.clone()),
            ..VerifyOptions::default()
        };
        let rv = verify_gsp(&j, &r12.state, &protected)?;
        checks.push(Check::hard("clamped_gsp_verified", rv.passed(), format!("{rv:?}")));

        // Two bonds.
        let set = two_bond_critical_set(&j, b, e)?;
        checks.push(Check::hard(
            "two_bond_identity",
            set.identity_residual().abs() <= tol,
            format!("{:e}", set.identity_residual()),
        ));
        let cons = consistency_check(&j, b, e)?;
        checks.push(Check::hard(
            "two_bond_piecewise",
            cons.passed(tol),
            format!("max error {:e}", cons.max_error),
        ));
        let moved = two_bond_critical_set(
            &j.with_values(&[(b, rng.random_range(-3.0..3.0)), (e, rng.random_range(-3.0..3.0))])?,
            b,
            e,
        )?;
        checks.push(Check::hard(
            "two_bond_constants_independent",
            moved.exterior_energies == set.exterior_energies,
            format!("{:?} vs {:?}", set.exterior_energies, moved.exterior_energies),
        ));
        let (lo, hi) = (set.c1.min(set.c2), set.c1.max(set.c2));
        // Off-center inside probe: C1 + C2 = 0 is common for adjacent pairs,
        // and a zero coupling is satisfied in neither state.
        let mut probes_b = vec![lo - 0.5, hi + 0.5];
        if set.case != CaseKind::Cross {
            probes_b.push(lo + 0.375 * (hi - lo));
        }
        let mut band_ok = true;
        for x in probes_b {
            let inside = lo < x && x < hi;
            band_ok &= critical_contour(&j.with_value(b, x)?, &dual, e)?.contains(b) == inside;
        }
        checks.push(Check::hard("middle_band_membership", band_ok, format!("C1 = {}, C2 = {}", set.c1, set.c2)));

        // Critical contour of b.
        let contour = critical_contour(&j, &dual, b)?;
        checks.push(Check::hard("contour_contains_edge", contour.contains(b), String::new()));
        let tether = no_double_tether_check(&domain_walls(&contour, &dual), &dual);
        checks.push(Check::hard("contour_no_double_tether", tether.passed(), format!("{tether:?}")));

        // Super-satisfaction.
        let s = rng.random_range(0..geom.num_edges());
        let sign = if rng.random::<bool>() { Sign::Plus } else { Sign::Minus };
        let forced = super_satisfy(&j, s, sign, default_margin(supersatisfied_threshold(&j, s)))?;
        let fgs = ground_state(&forced, None)?;
        checks.push(Check::hard(
            "supersatisfied_sign_forced",
            fgs.edge_sign(&geom, s) == sign,
            format!("edge {s}"),
        ));
        let mut offenders = Vec::new();
        let mut probed = 0;
        while probed < *probes {
            let p = rng.random_range(0..geom.num_edges());
            if p == s {
                continue;
            }
            probed += 1;
            if critical_contour(&forced, &dual, p)?.contains(s) {
                let shared = geom.edge(p).endpoints().into_iter().find(|&v| geom.edge(s).touches(v));
                offenders.push((p, shared));
            }
        }
        checks.push(Check::hard(
            "supersatisfied_not_in_contours",
            offenders.is_empty(),
            format!("edge {s} lies in the critical contours of (edge, shared endpoint) {offenders:?}"),
        ));

        Ok(SampleOutcome {
            index,
            record: json!({
                "index": index,
                "energy": gs.energy(),
                "critical_value": c,
                "two_bond": set,
                "contour_size": contour.len(),
                "supersatisfied_edge": s,
            }),
            checks,
        })
    })?;
    Ok(builder)
}
