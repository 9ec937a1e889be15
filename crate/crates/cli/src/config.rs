//! Run configuration: a TOML file whose top-level keys apply to every
//! subcommand and whose `[section]` tables apply to the subcommand of that
//! name. Command-line flags take precedence over both.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use sha2::{Digest, Sha256};

pub const SEED_ENV: &str = "KC_SEED";

#[derive(Debug, Clone, Default)]
pub struct Config {
    table: toml::Table,
    /// SHA-256 of the file bytes, when loaded from a file.
    pub hash: Option<String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let text = String::from_utf8(bytes.clone()).context("config is not UTF-8")?;
        let mut cfg = Self::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.hash = Some(sha256_hex(&bytes));
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self { table: text.parse::<toml::Table>()?, hash: None })
    }

    /// Value for `key` in `section`, falling back to the top level.
    pub fn get<T: DeserializeOwned>(&self, section: &str, key: &str) -> Result<Option<T>> {
        let scoped = self.table.get(section).and_then(|s| s.as_table()).and_then(|t| t.get(key));
        let global = self.table.get(key).filter(|v| !v.is_table());
        match scoped.or(global) {
            None => Ok(None),
            Some(v) => Ok(Some(v.clone().try_into().with_context(|| format!("config key `{section}.{key}`"))?)),
        }
    }

    /// Seed precedence: flag, then `KC_SEED`, then config, then 0.
    pub fn seed(&self, section: &str, flag: Option<u64>) -> Result<u64> {
        if let Some(s) = flag {
            return Ok(s);
        }
        if let Ok(raw) = std::env::var(SEED_ENV) {
            return raw.trim().parse().with_context(|| format!("{SEED_ENV}=`{raw}` is not an unsigned integer"));
        }
        Ok(self.get(section, "seed")?.unwrap_or(0))
    }

    pub fn sections(&self) -> BTreeMap<String, String> {
        self.table.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Resolves a setting: flag, then config, then the default.
pub fn pick<T: DeserializeOwned>(cfg: &Config, section: &str, key: &str, flag: Option<T>, default: T) -> Result<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    Ok(cfg.get(section, key)?.unwrap_or(default))
}
