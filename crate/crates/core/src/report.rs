use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Outcome of a single named residual check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

/// A set of named residuals with the tolerances they were judged against.
///
/// Residuals are always finite and nonnegative; a non-finite measurement is
/// recorded as `f64::MAX` and fails.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub entries: BTreeMap<String, CheckEntry>,
}

impl CheckReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `residual <= tolerance`.
    pub fn record(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) -> bool {
        let finite = residual.is_finite();
        let residual = if finite { residual.abs() } else { f64::MAX };
        let pass = finite && residual <= tolerance;
        self.entries.insert(
            name.into(),
            CheckEntry {
                residual,
                tolerance,
                pass,
                note: None,
            },
        );
        pass
    }

    /// Records a boolean condition; the residual is 0 on success and 1 otherwise.
    pub fn record_flag(&mut self, name: impl Into<String>, ok: bool) -> bool {
        self.record(name, if ok { 0.0 } else { 1.0 }, 0.5)
    }

    pub fn annotate(&mut self, name: &str, note: impl Into<String>) {
        if let Some(e) = self.entries.get_mut(name) {
            e.note = Some(note.into());
        }
    }

    pub fn merge(&mut self, prefix: &str, other: CheckReport) {
        for (k, v) in other.entries {
            let key = if prefix.is_empty() {
                k
            } else {
                format!("{prefix}.{k}")
            };
            self.entries.insert(key, v);
        }
    }

    pub fn all_pass(&self) -> bool {
        self.entries.values().all(|e| e.pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.get(name)
    }

    pub fn residual(&self, name: &str) -> f64 {
        self.entries.get(name).map_or(f64::NAN, |e| e.residual)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(_, e)| !e.pass)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.entries.values().map(|e| e.residual).fold(0.0, f64::max)
    }
}
