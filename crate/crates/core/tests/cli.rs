use std::path::Path;
use std::process::{Command, Output};

fn ea_lab(args: &[&str], out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ea-lab"));
    cmd.args(args).env_remove("EALAB_OUT_DIR").env_remove("EALAB_PARALLEL");
    if let Some(dir) = out {
        cmd.env("EALAB_OUT_DIR", dir);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn records(dir: &Path) -> Vec<serde_json::Value> {
    std::fs::read_to_string(dir.join("records.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn solve_with_defaults_succeeds() {
    let o = ea_lab(&["solve", "--samples", "5"], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("solve seed=1 samples=5 hash="));
    assert!(text.contains("[PASS] gsp_verified"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(&path, "seed = 1\nsamples = 2\ngeometry = { n = 2 }\n[experiment]\nkind = \"solve\"\n").unwrap();
    let o = ea_lab(&["flip-sweep", "--config", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not `flip_sweep`"));

    std::fs::write(&path, "seed = 1\n").unwrap();
    assert_eq!(ea_lab(&["run", "--config", path.to_str().unwrap()], None).status.code(), Some(1));
    assert_eq!(ea_lab(&["run"], None).status.code(), Some(1));
    assert_eq!(ea_lab(&["solve", "--samples", "0"], None).status.code(), Some(1));
}

#[test]
fn hard_failure_exits_with_two_and_prints_a_reproducer() {
    let o = ea_lab(&["contour-stats"], None);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    assert!(text.contains("[FAIL] no_double_tether"));
    assert!(text.contains("reproduce: ea-lab run --config-json '"));
}

#[test]
fn reproducer_replays_the_failing_record() {
    let batch_dir = tempfile::tempdir().unwrap();
    let o = ea_lab(&["contour-stats"], Some(batch_dir.path()));
    let text = stdout(&o);
    let line = text.lines().find_map(|l| l.trim().strip_prefix("reproduce: ")).unwrap();
    let json = line
        .strip_prefix("ea-lab run --config-json '")
        .and_then(|s| s.strip_suffix('\''))
        .unwrap();
    let index = serde_json::from_str::<serde_json::Value>(json).unwrap()["first_sample"]
        .as_u64()
        .unwrap();

    let replay_dir = tempfile::tempdir().unwrap();
    let o = ea_lab(&["run", "--config-json", json], Some(replay_dir.path()));
    assert_eq!(o.status.code(), Some(2));
    let replay = records(replay_dir.path());
    assert_eq!(replay.len(), 1);
    assert_eq!(replay[0], records(batch_dir.path())[index as usize]);
}

#[test]
fn out_dir_from_environment_receives_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = ea_lab(&["flip-sweep", "--samples", "3"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(0));
    for f in ["records.jsonl", "summary.json", "aggregates.csv"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    assert_eq!(records(dir.path()).len(), 3);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(&path, "seed = 1\nsamples = 2\ngeometry = { n = 2 }\n[experiment]\nkind = \"solve\"\n").unwrap();
    let path = path.to_str().unwrap();
    let from_file = stdout(&ea_lab(&["solve", "--config", path], None));
    assert!(from_file.starts_with("solve seed=1 samples=2 "));
    let overridden = stdout(&ea_lab(&["run", "--config", path, "--seed", "9", "--samples", "3"], None));
    assert!(overridden.starts_with("solve seed=9 samples=3 "));
}

#[test]
fn thread_count_does_not_change_the_hash() {
    let hash = |threads: &str| {
        let text = stdout(&ea_lab(&["property-suite", "--samples", "6", "--parallel", threads], None));
        text.split_whitespace().find_map(|w| w.strip_prefix("hash=")).unwrap().to_string()
    };
    assert_eq!(hash("1"), hash("4"));
}
