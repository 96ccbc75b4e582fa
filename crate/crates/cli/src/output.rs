//! Per-run output directory: a deterministic `payload.json`, a `report.json`
//! with timing and pass flags, and an optional CSV table.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{CliResult, Format};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One asserted property with the measured value and its threshold.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, value: f64, threshold: impl Into<String>) -> Self {
        Self { name: name.into(), pass, value, threshold: threshold.into() }
    }

    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(name, value <= bound, value, format!("<= {bound:e}"))
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(name, value >= bound, value, format!(">= {bound}"))
    }

    pub fn within(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self::new(name, (value - target).abs() <= tol, value, format!("{target} ± {tol:e}"))
    }

    pub fn in_band(name: impl Into<String>, value: f64, band: pbnc_core::thresholds::Band) -> Self {
        Self::new(name, band.contains(value), value, format!("[{}, {}]", band.lo, band.hi))
    }
}

/// Rows rendered to CSV through their `Serialize` impl.
pub struct Table(pub String);

impl Table {
    pub fn from_rows<T: Serialize>(rows: &[T]) -> CliResult<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| crate::config::CliError::Config(e.to_string()))?;
        Ok(Table(String::from_utf8(bytes).expect("csv output is UTF-8")))
    }
}

pub struct Outcome {
    pub results: Value,
    pub checks: Vec<Check>,
    pub table: Option<Table>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// `<out>/<command>-<first 12 hex digits of the config hash>`.
pub fn run_dir(out: &Path, command: &str, config: &Value) -> PathBuf {
    let key = serde_json::to_string(&json!({ "command": command, "config": config })).expect("config serializes");
    out.join(format!("{command}-{}", &sha256_hex(key.as_bytes())[..12]))
}

/// Writes the run directory and returns the report document.
pub fn write_run(
    dir: &Path,
    command: &str,
    config: &Value,
    outcome: &Outcome,
    format: Format,
    runtime_ms: u128,
) -> CliResult<Value> {
    std::fs::create_dir_all(dir)?;
    let thresholds = pbnc_core::thresholds::version_hash();
    let payload = json!({
        "command": command,
        "artifact_version": ARTIFACT_VERSION,
        "thresholds_version": thresholds,
        "config": config,
        "results": outcome.results,
        "checks": outcome.checks,
    });
    let mut payload_text = serde_json::to_string_pretty(&payload)?;
    payload_text.push('\n');
    std::fs::write(dir.join("payload.json"), &payload_text)?;
    if let (Format::Csv, Some(t)) = (format, &outcome.table) {
        std::fs::write(dir.join("table.csv"), &t.0)?;
    }
    let pass: serde_json::Map<String, Value> =
        outcome.checks.iter().map(|c| (c.name.clone(), Value::Bool(c.pass))).collect();
    let report = json!({
        "command": command,
        "artifact_version": ARTIFACT_VERSION,
        "thresholds_version": thresholds,
        "config": config,
        "payload_sha256": sha256_hex(payload_text.as_bytes()),
        "runtime_ms": runtime_ms as u64,
        "pass": pass,
        "all_pass": outcome.checks.iter().all(|c| c.pass),
        "run_dir": dir.display().to_string(),
    });
    let mut report_text = serde_json::to_string_pretty(&report)?;
    report_text.push('\n');
    std::fs::write(dir.join("report.json"), report_text)?;
    Ok(report)
}
