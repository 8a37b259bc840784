//! Curve files: a `#`-prefixed header carrying the run manifest as JSON,
//! followed by plain CSV.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

const MANIFEST_PREFIX: &str = "# manifest: ";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub gamma: f64,
    /// Empty where no closed form applies (m > 1).
    pub h_closedform: Option<f64>,
    pub h_oracle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveFile {
    pub manifest: RunManifest,
    pub rows: Vec<CurveRow>,
}

pub fn write_curve(path: &Path, manifest: &RunManifest, rows: &[CurveRow]) -> CliResult<()> {
    let mut f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    writeln!(f, "# H(gamma) = (r/N) E[phi | dirty sample] - 1")?;
    writeln!(f, "{MANIFEST_PREFIX}{}", serde_json::to_string(manifest)?)?;
    let mut w = csv::Writer::from_writer(f);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve(path: &Path) -> CliResult<CurveFile> {
    let f = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut manifest = None;
    for line in BufReader::new(f).lines() {
        let line = line?;
        if !line.starts_with('#') {
            break;
        }
        if let Some(json) = line.strip_prefix(MANIFEST_PREFIX) {
            manifest = Some(serde_json::from_str(json)?);
        }
    }
    let manifest = manifest.ok_or_else(|| CliError::Io(format!("{}: no manifest header", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let rows = rdr.deserialize().collect::<Result<Vec<CurveRow>, _>>()?;
    Ok(CurveFile { manifest, rows })
}
