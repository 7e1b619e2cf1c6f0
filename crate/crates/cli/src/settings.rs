//! Config file loading and `--set key=value` overrides.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use risdet::config::RunConfig;
use serde_json::Value;

/// Raised for anything wrong with the user-supplied configuration.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(ConfigError(msg.into()))
}

/// Reads a config file. A run manifest is accepted too; its `config`
/// section is used.
pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut value: Value = serde_json::from_str(&text)
        .map_err(|e| config_err(format!("{}: invalid JSON: {e}", path.display())))?;
    if value.get("manifest_version").is_some() {
        value = value.get_mut("config").map(Value::take).ok_or_else(|| {
            config_err(format!(
                "{}: manifest has no config section",
                path.display()
            ))
        })?;
    }
    serde_json::from_value(value).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

/// Applies dotted overrides such as `model.rho=0.5`. Values are parsed as
/// JSON and fall back to plain strings.
pub fn apply_overrides(cfg: &RunConfig, overrides: &[String]) -> anyhow::Result<RunConfig> {
    if overrides.is_empty() {
        return Ok(cfg.clone());
    }
    let mut root = serde_json::to_value(cfg)?;
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| config_err(format!("override '{item}' is not key=value")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        set_path(&mut root, key, value)
            .map_err(|e| config_err(format!("override '{item}': {e}")))?;
    }
    serde_json::from_value(root).map_err(|e| config_err(format!("after overrides: {e}")))
}

fn set_path(root: &mut Value, key: &str, value: Value) -> anyhow::Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("empty key segment");
    }
    let mut node = root;
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| anyhow!("'{}' is not a section", parts[..i].join(".")))?;
        if i + 1 == parts.len() {
            if !obj.contains_key(*part) {
                bail!("unknown key '{key}'");
            }
            obj.insert((*part).to_string(), value);
            return Ok(());
        }
        node = obj
            .get_mut(*part)
            .ok_or_else(|| anyhow!("unknown key '{key}'"))?;
    }
    unreachable!("split always yields at least one segment")
}
