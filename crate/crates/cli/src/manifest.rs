use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use pogg_core::GameConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliResult;

/// Provenance record embedded in every curve file and report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub configs: Vec<GameConfig>,
    pub tool_version: String,
    pub seeds: Vec<u64>,
    /// Seconds since the epoch; `SOURCE_DATE_EPOCH` wins when set so that
    /// repeated runs can be byte-identical.
    pub timestamp: u64,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str, configs: Vec<GameConfig>) -> Self {
        RunManifest {
            command: command.to_string(),
            configs,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seeds: Vec::new(),
            timestamp: timestamp(),
            outputs: Vec::new(),
            rng: None,
        }
    }
}

fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.trim().parse().ok()) {
        return t;
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Appends one JSON line; earlier entries are never rewritten.
pub fn append_to_log(path: &Path, manifest: &RunManifest) -> CliResult<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(f, "{}", serde_json::to_string(manifest)?)?;
    Ok(())
}
