//! Whether the ground state restricted to a fixed window settles as the box
//! grows, and how often two box sizes disagree there.

use ea_lab::lab::{self, Experiment, ExperimentConfig, GeometrySpec, WindowSpec};

fn main() -> ea_lab::Result<()> {
    let experiment = Experiment::Convergence {
        window: WindowSpec { width: 3, height: 2 },
        n_list: vec![2, 3, 4, 5, 6],
    };
    let config = ExperimentConfig::new(experiment, GeometrySpec::square(2), 1, 100);
    let report = lab::run(&config)?;
    for row in report.tables["trend"]["rows"].as_array().unwrap() {
        println!(
            "n = {} -> {}: disagree {:.3} ± {:.3}",
            row["n"], row["n_next"], row["frequency"].as_f64().unwrap(), row["std_error"].as_f64().unwrap()
        );
    }

    let experiment = Experiment::UniquenessProbe {
        window: WindowSpec { width: 3, height: 2 },
        pairs: vec![(2, 6), (3, 6), (4, 6), (5, 6)],
    };
    let report = lab::run(&ExperimentConfig::new(experiment, GeometrySpec::square(2), 1, 100))?;
    for (name, a) in &report.aggregates {
        println!("{name}: {:.3} ± {:.3}", a.mean, a.std_error);
    }
    Ok(())
}
