//! Run manifests: everything needed to reproduce a run, plus its metrics.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::sha256_hex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started: String,
    pub finished: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    pub flags: BTreeMap<String, String>,
    pub config_hash: Option<String>,
    /// Path → SHA-256 of the file contents.
    pub inputs: BTreeMap<String, String>,
    pub seed: u64,
    pub metrics: BTreeMap<String, f64>,
    /// Free-form comparisons against closed-form oracles.
    pub oracle: BTreeMap<String, serde_json::Value>,
    /// Kept apart so that everything else compares byte for byte.
    pub timing: Timing,
}

impl RunManifest {
    pub fn new(subcommand: &str, seed: u64) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            flags: BTreeMap::new(),
            config_hash: None,
            inputs: BTreeMap::new(),
            seed,
            metrics: BTreeMap::new(),
            oracle: BTreeMap::new(),
            timing: Timing { started: now(), finished: String::new() },
        }
    }

    pub fn flag(&mut self, key: &str, value: impl ToString) {
        self.flags.insert(key.to_string(), value.to_string());
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(())
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.to_string(), value);
    }

    pub fn finish(&mut self) {
        self.timing.finished = now();
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut m = RunManifest::new("gen", 7);
        m.flag("n", 100);
        m.metric("loss", 0.25);
        m.finish();
        let back: RunManifest = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }
}
