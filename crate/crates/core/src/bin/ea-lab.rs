use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ea_lab::lab::{self, ExperimentConfig};
use ea_lab::Result;

/// Exact ground-state experiments on Edwards-Anderson half-plane boxes.
#[derive(Parser)]
#[command(name = "ea-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground states, optionally checked against local flips.
    Solve(Common),
    /// Critical value of one edge against a sweep of its coupling.
    FlipSweep(Common),
    /// Critical set of two edges against a grid of both couplings.
    TwoBondMap(Common),
    /// Critical contours of one edge.
    ContourStats(Common),
    /// Tethered domain-wall counts for a pair proxy.
    WallStats(Common),
    /// Window agreement across a sequence of boxes.
    Convergence(Common),
    /// Window agreement for chosen pairs of boxes.
    UniquenessProbe(Common),
    /// Per-instance checks of the exact properties.
    PropertySuite(Common),
    /// Whatever experiment the config names.
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Inline JSON config, as printed in reproducers.
    #[arg(long, conflicts_with = "config")]
    config_json: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    first_sample: Option<u64>,
    /// Output directory for records.jsonl, summary.json and aggregates.csv.
    #[arg(long, env = "EALAB_OUT_DIR")]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "EALAB_PARALLEL")]
    parallel: Option<usize>,
}

impl Command {
    fn parts(&self) -> (Option<&'static str>, &Common) {
        match self {
            Command::Solve(c) => (Some("solve"), c),
            Command::FlipSweep(c) => (Some("flip_sweep"), c),
            Command::TwoBondMap(c) => (Some("two_bond_map"), c),
            Command::ContourStats(c) => (Some("contour_stats"), c),
            Command::WallStats(c) => (Some("wall_stats"), c),
            Command::Convergence(c) => (Some("convergence"), c),
            Command::UniquenessProbe(c) => (Some("uniqueness_probe"), c),
            Command::PropertySuite(c) => (Some("property_suite"), c),
            Command::Run(c) => (None, c),
        }
    }
}

fn config(kind: Option<&str>, args: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match (&args.config, &args.config_json, kind) {
        (Some(path), _, _) => ExperimentConfig::load(path)?,
        (None, Some(text), _) => ExperimentConfig::from_json_str(text)?,
        (None, None, Some(kind)) => ExperimentConfig::default_for(kind)?,
        (None, None, None) => {
            return Err(ea_lab::Error::InvalidArgument("`run` needs --config or --config-json".into()));
        }
    };
    if let Some(kind) = kind {
        if cfg.experiment.kind() != kind {
            return Err(ea_lab::Error::InvalidArgument(format!(
                "config describes a `{}` experiment, not `{kind}`",
                cfg.experiment.kind()
            )));
        }
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(n) = args.samples {
        cfg.samples = n;
    }
    if let Some(i) = args.first_sample {
        cfg.first_sample = i;
    }
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    if args.parallel.is_some() {
        cfg.parallel = args.parallel;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.parts();
    let cfg = match config(kind, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let report = match lab::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    println!(
        "{} seed={} samples={} hash={} ({:.2}s)",
        report.kind,
        cfg.seed,
        cfg.samples,
        report.content_hash,
        report.wall_clock_seconds
    );
    for (name, a) in &report.aggregates {
        println!("  {name:<28} {:>12.6} ± {:.6}", a.mean, a.std_error);
    }
    for a in &report.assertions {
        let status = if a.passed { "PASS" } else { "FAIL" };
        let level = if a.hard { "hard" } else { "soft" };
        println!("  [{status}] {} ({level}, {}/{} failing): {}", a.name, a.failures, a.checked, a.detail);
        if let Some(r) = &a.reproducer {
            if !a.passed {
                println!("    reproduce: {r}");
            }
        }
    }
    for f in &report.flags {
        println!("  flag: {f}");
    }
    if let Some(dir) = &cfg.out {
        println!("  wrote {}", dir.display());
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
