//! Run reports: records, aggregates, assertions, hashing and output files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Sample mean with the i.i.d. standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub count: usize,
    pub mean: f64,
    pub std_error: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self {
                count,
                mean: f64::NAN,
                std_error: f64::NAN,
            };
        }
        let n = count as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std_error = if count > 1 {
            let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Self { count, mean, std_error }
    }

    /// Frequency of `hits` among `count` trials with its binomial standard error.
    pub fn proportion(hits: usize, count: usize) -> Self {
        if count == 0 {
            return Self::of(&[]);
        }
        let p = hits as f64 / count as f64;
        Self {
            count,
            mean: p,
            std_error: (p * (1.0 - p) / count as f64).sqrt(),
        }
    }
}

/// A per-sample check, collected by the experiment drivers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub hard: bool,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn hard(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            hard: true,
            passed,
            detail: detail.into(),
        }
    }
}

/// Outcome of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    pub index: u64,
    pub record: Value,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertionResult {
    pub name: String,
    pub hard: bool,
    pub passed: bool,
    pub checked: usize,
    pub failures: usize,
    pub detail: String,
    /// Replays the first failing sample on its own.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reproducer: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub kind: String,
    pub config: ExperimentConfig,
    pub records: Vec<Value>,
    pub aggregates: BTreeMap<String, Aggregate>,
    pub tables: BTreeMap<String, Value>,
    pub assertions: Vec<AssertionResult>,
    pub flags: Vec<String>,
    /// Not covered by the content hash.
    pub wall_clock_seconds: f64,
    pub content_hash: String,
}

impl RunReport {
    pub fn hard_failures(&self) -> Vec<&AssertionResult> {
        self.assertions.iter().filter(|a| a.hard && !a.passed).collect()
    }

    pub fn passed(&self) -> bool {
        self.hard_failures().is_empty()
    }

    pub fn assertion(&self, name: &str) -> Option<&AssertionResult> {
        self.assertions.iter().find(|a| a.name == name)
    }

    /// Summary document: everything except the per-sample records.
    pub fn summary(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        let obj = v.as_object_mut().expect("object");
        obj.remove("records");
        obj.insert("record_count".into(), json!(self.records.len()));
        v
    }

    /// Writes `records.jsonl`, `summary.json` and `aggregates.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let io = |e: std::io::Error| Error::InvalidArgument(format!("writing {}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        let mut lines = std::io::BufWriter::new(std::fs::File::create(dir.join("records.jsonl")).map_err(io)?);
        for r in &self.records {
            serde_json::to_writer(&mut lines, r).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            lines.write_all(b"\n").map_err(io)?;
        }
        lines.flush().map_err(io)?;
        let summary = serde_json::to_string_pretty(&self.summary()).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        std::fs::write(dir.join("summary.json"), summary + "\n").map_err(io)?;
        let mut csv = csv::Writer::from_path(dir.join("aggregates.csv"))
            .map_err(|e| Error::InvalidArgument(format!("aggregates.csv: {e}")))?;
        let cerr = |e: csv::Error| Error::InvalidArgument(format!("aggregates.csv: {e}"));
        csv.write_record(["name", "count", "mean", "std_error"]).map_err(cerr)?;
        for (name, a) in &self.aggregates {
            csv.write_record([name.clone(), a.count.to_string(), a.mean.to_string(), a.std_error.to_string()])
                .map_err(cerr)?;
        }
        csv.flush().map_err(io)?;
        Ok(())
    }
}

/// Assembles a report from sample outcomes (already in index order).
pub(crate) struct ReportBuilder {
    pub config: ExperimentConfig,
    pub outcomes: Vec<SampleOutcome>,
    pub aggregates: BTreeMap<String, Aggregate>,
    pub tables: BTreeMap<String, Value>,
    pub extra: Vec<AssertionResult>,
    pub flags: Vec<String>,
}

impl ReportBuilder {
    pub fn new(config: ExperimentConfig, mut outcomes: Vec<SampleOutcome>) -> Self {
        outcomes.sort_by_key(|o| o.index);
        Self {
            config,
            outcomes,
            aggregates: BTreeMap::new(),
            tables: BTreeMap::new(),
            extra: Vec::new(),
            flags: Vec::new(),
        }
    }

    pub fn aggregate(&mut self, name: impl Into<String>, values: &[f64]) {
        self.aggregates.insert(name.into(), Aggregate::of(values));
    }

    pub fn proportion(&mut self, name: impl Into<String>, hits: usize, count: usize) {
        self.aggregates.insert(name.into(), Aggregate::proportion(hits, count));
    }

    /// Per-sample values of a numeric record field.
    pub fn field(&self, pointer: &str) -> Vec<f64> {
        self.outcomes
            .iter()
            .filter_map(|o| o.record.pointer(pointer).and_then(Value::as_f64))
            .collect()
    }

    pub fn finish(self, wall_clock_seconds: f64) -> RunReport {
        let mut by_name: BTreeMap<String, AssertionResult> = BTreeMap::new();
        let mut order: Vec<String> = Vec::new();
        for o in &self.outcomes {
            for c in &o.checks {
                let entry = by_name.entry(c.name.clone()).or_insert_with(|| {
                    order.push(c.name.clone());
                    AssertionResult {
                        name: c.name.clone(),
                        hard: c.hard,
                        passed: true,
                        checked: 0,
                        failures: 0,
                        detail: String::new(),
                        reproducer: None,
                    }
                });
                entry.checked += 1;
                if !c.passed {
                    entry.failures += 1;
                    if entry.passed {
                        entry.passed = false;
                        entry.detail = format!("sample {}: {}", o.index, c.detail);
                        entry.reproducer = Some(reproducer(&self.config, o.index));
                    }
                }
            }
        }
        let mut assertions: Vec<AssertionResult> = order.into_iter().map(|n| by_name.remove(&n).unwrap()).collect();
        for a in &mut assertions {
            if a.passed {
                a.detail = format!("{} checks passed", a.checked);
            }
        }
        assertions.extend(self.extra);

        let mut report = RunReport {
            schema_version: super::config::SCHEMA_VERSION,
            kind: self.config.experiment.kind().into(),
            records: self.outcomes.into_iter().map(|o| o.record).collect(),
            config: self.config,
            aggregates: self.aggregates,
            tables: self.tables,
            assertions,
            flags: self.flags,
            wall_clock_seconds,
            content_hash: String::new(),
        };
        report.content_hash = content_hash(&report);
        report
    }
}

/// SHA-256 over the report with wall-clock time, output path and
/// parallelism removed.
pub fn content_hash(report: &RunReport) -> String {
    let mut config = report.config.clone();
    config.parallel = None;
    config.out = None;
    let doc = json!({
        "schema_version": report.schema_version,
        "kind": report.kind,
        "config": config,
        "records": report.records,
        "aggregates": report.aggregates,
        "tables": report.tables,
        "assertions": report.assertions,
        "flags": report.flags,
    });
    let bytes = serde_json::to_vec(&doc).expect("report serializes");
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Command line replaying a single sample.
pub fn reproducer(config: &ExperimentConfig, index: u64) -> String {
    let mut one = config.clone();
    one.first_sample = index;
    one.samples = 1;
    one.parallel = None;
    one.out = None;
    let inline = serde_json::to_string(&one).expect("config serializes");
    format!("ea-lab run --config-json '{}'", inline.replace('\'', "'\\''"))
}

/// Structural check of a summary document (as written to `summary.json`).
pub fn validate_summary(v: &Value) -> Result<()> {
    let fail = |m: &str| Err(Error::InvalidArgument(format!("summary: {m}")));
    let Some(obj) = v.as_object() else {
        return fail("not an object");
    };
    let need = |key: &str, ok: fn(&Value) -> bool| -> Result<()> {
        match obj.get(key) {
            Some(x) if ok(x) => Ok(()),
            Some(_) => Err(Error::InvalidArgument(format!("summary: `{key}` has the wrong type"))),
            None => Err(Error::InvalidArgument(format!("summary: missing `{key}`"))),
        }
    };
    need("schema_version", Value::is_u64)?;
    need("kind", Value::is_string)?;
    need("config", Value::is_object)?;
    need("aggregates", Value::is_object)?;
    need("tables", Value::is_object)?;
    need("assertions", Value::is_array)?;
    need("flags", Value::is_array)?;
    need("wall_clock_seconds", Value::is_number)?;
    need("record_count", Value::is_u64)?;
    need("content_hash", |h| h.as_str().is_some_and(|s| s.len() == 64 && s.bytes().all(|b| b.is_ascii_hexdigit())))?;
    for (name, a) in obj["aggregates"].as_object().unwrap() {
        let ok = a.get("count").is_some_and(Value::is_u64)
            && a.get("mean").is_some()
            && a.get("std_error").is_some();
        if !ok {
            return fail(&format!("aggregate `{name}` malformed"));
        }
    }
    for a in obj["assertions"].as_array().unwrap() {
        let ok = a.get("name").is_some_and(Value::is_string)
            && a.get("hard").is_some_and(Value::is_boolean)
            && a.get("passed").is_some_and(Value::is_boolean)
            && a.get("checked").is_some_and(Value::is_u64);
        if !ok {
            return fail("assertion entry malformed");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_moments() {
        let a = Aggregate::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(a.mean, 2.5);
        // sample variance 5/3, se = sqrt(5/12)
        assert!((a.std_error - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        let p = Aggregate::proportion(1, 4);
        assert_eq!(p.mean, 0.25);
        assert!((p.std_error - (0.25f64 * 0.75 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(Aggregate::of(&[3.0]).std_error, 0.0);
    }
}
