//! CSV artifacts and the run manifest written next to them.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use risdet::config::RunConfig;
use risdet::montecarlo::CurvePoint;
use serde::{Deserialize, Serialize};

use crate::Command;

pub const MANIFEST_VERSION: u32 = 1;
/// Bumped whenever a CSV column set changes.
pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_version: u32,
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub master_seed: u64,
    pub config: RunConfig,
    pub timestamp_unix: u64,
    pub threads: usize,
    pub csv_schema_version: u32,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &Command, config: &RunConfig, outputs: Vec<PathBuf>) -> Self {
        Self {
            manifest_version: MANIFEST_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.clone(),
            master_seed: config.experiment.master_seed,
            config: config.clone(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            threads: rayon::current_num_threads(),
            csv_schema_version: CSV_SCHEMA_VERSION,
            outputs,
        }
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| {
            crate::settings::config_err(format!("{}: not a run manifest: {e}", path.display()))
        })
    }
}

/// Collects artifact paths for one command invocation.
pub struct Sink {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> anyhow::Result<PathBuf> {
        let path = self.dir.join(name);
        let mut w =
            csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, serde_json::to_string_pretty(value)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Writes `manifest.json` listing everything written so far.
    pub fn finish(self, command: &Command, config: &RunConfig) -> anyhow::Result<PathBuf> {
        let path = self.dir.join("manifest.json");
        let m = RunManifest::new(command, config, self.written);
        fs::write(&path, serde_json::to_string_pretty(&m)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// Row of every probability curve (P_d, P_fa, sliding window).
#[derive(Debug, Serialize)]
pub struct CurveRow {
    pub detector: String,
    pub x: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
}

pub fn curve_rows(points: &[CurvePoint], seed: u64) -> Vec<CurveRow> {
    points
        .iter()
        .map(|p| CurveRow {
            detector: p.detector.to_string(),
            x: p.x,
            estimate: p.estimate,
            stderr: p.stderr,
            trials: p.trials,
            seed,
        })
        .collect()
}
