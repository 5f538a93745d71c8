//! Running an experiment from a TOML config and writing the report files.
//!
//! ```bash
//! cargo run --release --example run_config -- /tmp/ea-lab-report
//! ```

use std::path::PathBuf;

use ea_lab::lab::{self, validate_summary, ExperimentConfig};

const CONFIG: &str = r#"
seed = 2024
samples = 50
geometry = { n = 2 }

[experiment]
kind = "flip_sweep"
points = 41
tolerance = 1e-9
"#;

fn main() -> ea_lab::Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("ea-lab-report"), PathBuf::from);
    let mut config = ExperimentConfig::from_toml_str(CONFIG)?;
    config.out = Some(out.clone());
    let report = lab::run(&config)?;
    validate_summary(&report.summary())?;

    println!("hash {}", report.content_hash);
    for a in &report.assertions {
        println!("{:<36} {}", a.name, if a.passed { "pass" } else { "FAIL" });
    }
    for f in ["records.jsonl", "summary.json", "aggregates.csv"] {
        let len = std::fs::metadata(out.join(f)).map(|m| m.len()).unwrap_or(0);
        println!("{} ({len} bytes)", out.join(f).display());
    }
    Ok(())
}
