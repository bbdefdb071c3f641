//! Versioned JSON configuration.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

pub fn schema_version() -> u32 {
    SCHEMA_VERSION
}

/// A parsed config and the raw bytes it was read from.
pub struct Loaded<T> {
    pub config: T,
    pub raw: Option<Vec<u8>>,
}

/// Read `path`, or fall back to defaults when no path is given. Files must
/// carry `"schema_version": 1`; unknown keys are rejected by the config types.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<Loaded<T>> {
    let Some(path) = path else {
        return Ok(Loaded { config: T::default(), raw: None });
    };
    let raw = std::fs::read(path).with_context(|| format!("reading config {}", path.display()))?;
    let value: Value = serde_json::from_slice(&raw).with_context(|| format!("parsing config {}", path.display()))?;
    match value.get("schema_version") {
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION as u64) => {}
        Some(v) => bail!("unsupported schema_version {v}; this build reads version {SCHEMA_VERSION}"),
        None => bail!("config {} is missing schema_version", path.display()),
    }
    let config = serde_json::from_value(value).with_context(|| format!("invalid config {}", path.display()))?;
    Ok(Loaded { config, raw: Some(raw) })
}
