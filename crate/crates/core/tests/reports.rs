use ea_lab::lab::{self, validate_summary, Experiment, ExperimentConfig, GeometrySpec, ProxyKind};

const KINDS: [&str; 8] = [
    "solve",
    "flip_sweep",
    "two_bond_map",
    "contour_stats",
    "wall_stats",
    "convergence",
    "uniqueness_probe",
    "property_suite",
];

fn small(kind: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default_for(kind).unwrap();
    cfg.samples = 4;
    cfg.seed = 11;
    match kind {
        "wall_stats" => cfg.geometry = GeometrySpec::square(3),
        "convergence" => {
            cfg.experiment = Experiment::Convergence {
                window: Default::default(),
                n_list: vec![2, 3, 4],
            }
        }
        "uniqueness_probe" => {
            cfg.experiment = Experiment::UniquenessProbe {
                window: Default::default(),
                pairs: vec![(2, 3), (2, 4)],
            }
        }
        "property_suite" => cfg.geometry = GeometrySpec::square(2),
        _ => {}
    }
    cfg
}

#[test]
fn every_kind_writes_consistent_files() {
    for kind in KINDS {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(kind);
        cfg.out = Some(dir.path().to_path_buf());
        let report = lab::run(&cfg).unwrap();
        assert_eq!(report.kind, kind);
        assert_eq!(report.records.len(), cfg.samples, "{kind}");

        let lines = std::fs::read_to_string(dir.path().join("records.jsonl")).unwrap();
        assert_eq!(lines.lines().count(), cfg.samples, "{kind}");
        for line in lines.lines() {
            serde_json::from_str::<serde_json::Value>(line).unwrap();
        }

        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        validate_summary(&summary).unwrap();
        assert_eq!(summary["content_hash"], serde_json::json!(report.content_hash));

        let mut csv = csv::Reader::from_path(dir.path().join("aggregates.csv")).unwrap();
        assert_eq!(csv.headers().unwrap(), vec!["name", "count", "mean", "std_error"]);
        assert_eq!(csv.records().count(), report.aggregates.len(), "{kind}");
    }
}

#[test]
fn summary_validation_rejects_missing_fields() {
    let report = lab::run(&small("solve")).unwrap();
    let mut summary = report.summary();
    validate_summary(&summary).unwrap();
    summary.as_object_mut().unwrap().remove("aggregates");
    assert!(validate_summary(&summary).is_err());
    assert!(validate_summary(&serde_json::json!([1, 2])).is_err());
}

#[test]
fn single_sample_replay_matches_batch() {
    for kind in ["flip_sweep", "property_suite", "wall_stats"] {
        let cfg = small(kind);
        let batch = lab::run(&cfg).unwrap();
        for index in [0, 3] {
            let mut one = cfg.clone();
            one.first_sample = index;
            one.samples = 1;
            let replay = lab::run(&one).unwrap();
            assert_eq!(replay.records[0], batch.records[index as usize], "{kind} sample {index}");
        }
    }
}

#[test]
fn hash_ignores_threads_and_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small("contour_stats");
    cfg.parallel = Some(1);
    let a = lab::run(&cfg).unwrap();
    cfg.parallel = Some(3);
    cfg.out = Some(dir.path().to_path_buf());
    let b = lab::run(&cfg).unwrap();
    assert_eq!(a.content_hash, b.content_hash);
    assert_eq!(a.records, b.records);

    cfg.seed += 1;
    assert_ne!(lab::run(&cfg).unwrap().content_hash, a.content_hash);
}

#[test]
fn proxies_give_distinct_ensembles() {
    let mut hashes = Vec::new();
    for proxy in [ProxyKind::CriticalContour, ProxyKind::NestedVolumes, ProxyKind::Resampled] {
        let mut cfg = small("wall_stats");
        if let Experiment::WallStats { proxy: p, .. } = &mut cfg.experiment {
            *p = proxy;
        }
        let report = lab::run(&cfg).unwrap();
        assert!(report.flags.iter().any(|f| f == &format!("proxy={}", proxy.name())));
        hashes.push(report.content_hash);
    }
    hashes.dedup();
    assert_eq!(hashes.len(), 3);
}

#[test]
fn toml_round_trip() {
    for kind in KINDS {
        let cfg = small(kind);
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg, "{kind}");
    }
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(ExperimentConfig::default_for("nope").is_err());
    assert!(ExperimentConfig::from_toml_str("seed = 1\nsamples = 2\n").is_err());
    let bad_geometry = "seed = 1\nsamples = 2\ngeometry = { n = 2, width = 5 }\n[experiment]\nkind = \"solve\"\n";
    assert!(ExperimentConfig::from_toml_str(bad_geometry).is_err());
    let unknown = "seed = 1\nsamples = 2\ncolour = 3\ngeometry = { n = 2 }\n[experiment]\nkind = \"solve\"\n";
    assert!(ExperimentConfig::from_toml_str(unknown).is_err());
}
