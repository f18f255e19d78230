//! Stored expected errors and the tolerance comparison used as a CI gate.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::{Operation, Status};

use super::{Measurement, MeasurementKey};

pub const BASELINE_SCHEMA_VERSION: u32 = 1;

const WARNING: &str = "machine-generated baseline; re-record instead of editing by hand";

/// Entry passes iff `rel_error <= expected * (1 + multiplicative) + absolute`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub absolute: f64,
    pub multiplicative: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy {
            absolute: 1e-12,
            multiplicative: 0.25,
        }
    }
}

impl TolerancePolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.absolute > 0.0 && self.absolute.is_finite() && self.multiplicative > 0.0 && self.multiplicative.is_finite()) {
            return Err(Error::invalid(format!(
                "tolerances must be positive and finite, got absolute {} multiplicative {}",
                self.absolute, self.multiplicative
            )));
        }
        Ok(())
    }

    pub fn admits(&self, measured: f64, expected: f64) -> bool {
        measured <= expected * (1.0 + self.multiplicative) + self.absolute
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineEntry {
    pub testcase: String,
    pub integrator: String,
    pub operation: Operation,
    pub divisions: usize,
    /// `ok`, `unsupported` or `failed`.
    pub status: String,
    #[serde(default)]
    pub expected_rel_error: Option<f64>,
}

impl BaselineEntry {
    pub fn key(&self) -> MeasurementKey {
        MeasurementKey {
            testcase: self.testcase.clone(),
            integrator: self.integrator.clone(),
            operation: self.operation,
            divisions: self.divisions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineFile {
    pub schema_version: u32,
    #[serde(rename = "_warning", default)]
    pub warning: String,
    #[serde(default)]
    pub generated_at: String,
    #[serde(default)]
    pub revision: String,
    pub tolerance: TolerancePolicy,
    pub entries: Vec<BaselineEntry>,
}

impl BaselineFile {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != BASELINE_SCHEMA_VERSION {
            return Err(Error::SchemaVersion(self.schema_version));
        }
        self.tolerance.validate()?;
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if !seen.insert(e.key()) {
                return Err(Error::invalid(format!("duplicate baseline entry {}", e.key())));
            }
            if !["ok", "unsupported", "failed"].contains(&e.status.as_str()) {
                return Err(Error::invalid(format!("baseline entry {} has unknown status '{}'", e.key(), e.status)));
            }
        }
        Ok(())
    }

    /// Keeps only the entries a run covering `keys` can be judged on, so a
    /// per-tier or per-integrator job is not failed for entries outside its scope.
    pub fn restricted_to(&self, keys: &BTreeSet<MeasurementKey>) -> BaselineFile {
        let mut out = self.clone();
        out.entries.retain(|e| keys.contains(&e.key()));
        out
    }
}

/// Snapshot of the measured errors, stamped with time and code revision.
pub fn record_baseline(measurements: &[Measurement], policy: TolerancePolicy) -> BaselineFile {
    BaselineFile {
        schema_version: BASELINE_SCHEMA_VERSION,
        warning: WARNING.to_string(),
        generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        revision: crate::REVISION.to_string(),
        tolerance: policy,
        entries: measurements
            .iter()
            .map(|m| BaselineEntry {
                testcase: m.testcase.clone(),
                integrator: m.integrator.clone(),
                operation: m.operation,
                divisions: m.divisions,
                status: m.status.label().to_string(),
                expected_rel_error: m.rel_error,
            })
            .collect(),
    }
}

pub fn save_baseline(baseline: &BaselineFile, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(baseline)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Reads and validates a baseline; syntax errors carry line and column.
pub fn load_baseline(path: &Path) -> Result<BaselineFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let b: BaselineFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    b.validate()?;
    Ok(b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryVerdict {
    pub key: MeasurementKey,
    pub expected_status: String,
    pub measured_status: Option<String>,
    pub expected_rel_error: Option<f64>,
    pub measured_rel_error: Option<f64>,
    pub passed: bool,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ComparisonReport {
    pub entries: Vec<EntryVerdict>,
    /// Measurements without a baseline entry (not judged).
    pub extras: Vec<MeasurementKey>,
    /// Measurements whose execution failed, with messages.
    pub execution_errors: Vec<(MeasurementKey, String)>,
}

impl ComparisonReport {
    /// A report with no baseline: only execution errors are collected.
    pub fn unchecked(measurements: &[Measurement]) -> Self {
        ComparisonReport {
            entries: Vec::new(),
            extras: measurements.iter().map(|m| m.key()).collect(),
            execution_errors: execution_errors(measurements),
        }
    }

    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| !e.passed).count()
    }

    /// All baseline entries pass and nothing failed to execute.
    pub fn passed(&self) -> bool {
        self.failures() == 0 && self.execution_errors.is_empty()
    }

    pub fn verdict_for(&self, key: &MeasurementKey) -> Option<&EntryVerdict> {
        self.entries.iter().find(|e| &e.key == key)
    }
}

fn execution_errors(measurements: &[Measurement]) -> Vec<(MeasurementKey, String)> {
    measurements
        .iter()
        .filter_map(|m| match &m.status {
            Status::Failed(msg) => Some((m.key(), msg.clone())),
            _ => None,
        })
        .collect()
}

pub fn compare_to_baseline(measurements: &[Measurement], baseline: &BaselineFile) -> ComparisonReport {
    let by_key: BTreeMap<MeasurementKey, &Measurement> = measurements.iter().map(|m| (m.key(), m)).collect();
    let tol = baseline.tolerance;
    let mut judged = BTreeSet::new();
    let entries = baseline
        .entries
        .iter()
        .map(|e| {
            let key = e.key();
            judged.insert(key.clone());
            let mut v = EntryVerdict {
                key: key.clone(),
                expected_status: e.status.clone(),
                measured_status: None,
                expected_rel_error: e.expected_rel_error,
                measured_rel_error: None,
                passed: false,
                reason: None,
            };
            let Some(m) = by_key.get(&key) else {
                v.reason = Some("no measurement".into());
                return v;
            };
            v.measured_status = Some(m.status.label().to_string());
            v.measured_rel_error = m.rel_error;
            if m.status.label() != e.status {
                v.reason = Some(format!("status {} != expected {}", m.status.label(), e.status));
                return v;
            }
            match (e.expected_rel_error, m.rel_error) {
                (Some(exp), Some(got)) if !tol.admits(got, exp) => {
                    v.reason = Some(format!(
                        "rel_error {got:e} > {exp:e} * (1 + {}) + {}",
                        tol.multiplicative, tol.absolute
                    ));
                }
                (Some(_), None) => v.reason = Some("rel_error missing".into()),
                _ => v.passed = true,
            }
            v
        })
        .collect();
    ComparisonReport {
        entries,
        extras: measurements.iter().map(|m| m.key()).filter(|k| !judged.contains(k)).collect(),
        execution_errors: execution_errors(measurements),
    }
}
