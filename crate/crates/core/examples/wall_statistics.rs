//! Mean tethered-wall counts for each pair proxy on a 9×9 box.
//!
//! Larger runs go through the `ea-lab wall-stats` subcommand.

use ea_lab::lab::{self, Experiment, ExperimentConfig, GeometrySpec, ProxyKind};

fn main() -> ea_lab::Result<()> {
    for proxy in ProxyKind::ALL {
        let experiment = Experiment::WallStats {
            proxy,
            edge: None,
            n_list: None,
            k_list: vec![0, 1, 2],
            window: None,
        };
        let mut config = ExperimentConfig::new(experiment, GeometrySpec::square(4), 1, 100);
        config.parallel = Some(4);
        let report = lab::run(&config)?;
        println!("{} ({:.1}s)", proxy.name(), report.wall_clock_seconds);
        let table = &report.tables["mean_counts"];
        for (n, row) in table["n"].as_array().unwrap().iter().zip(table["mean"].as_array().unwrap()) {
            let cells: Vec<String> = row.as_array().unwrap().iter().map(|v| format!("{:.3}", v.as_f64().unwrap())).collect();
            println!("  n = {n}: {}", cells.join("  "));
        }
        for a in &report.assertions {
            println!("  {} {}: {}", if a.passed { "ok  " } else { "FAIL" }, a.name, a.detail);
        }
    }
    Ok(())
}
