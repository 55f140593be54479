//! Run reports and benchmark tables written next to the other artifacts.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RisError};
use crate::io::write_bytes;

/// Machine-readable summary of one CLI run.
///
/// `broadcast_instants` counts pilot transmissions the method would need on
/// hardware; `algorithm_time_seconds` times only the configuration algorithm
/// itself, not channel synthesis or sensing-matrix construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub method: String,
    pub broadcast_instants: u64,
    pub active_elements: usize,
    pub algorithm_time_seconds: f64,
    /// Path gain at the receiver under the produced configuration, dB.
    pub gain_at_rx_db: f64,
    /// Optimized minus baseline gain at the receiver cell (coverage runs).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_delta_db: Option<f64>,
    pub config_path: String,
    /// File names of everything written to the output directory.
    pub artifacts: Vec<String>,
}

pub fn write_report(report: &RunReport, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn read_report(path: &Path) -> Result<RunReport> {
    let text = std::fs::read_to_string(path).map_err(|e| RisError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| RisError::Schema {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// One line of the benchmark table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: String,
    pub median_seconds: f64,
    pub repeats: usize,
    pub broadcast_instants: u64,
}

pub fn write_bench(rows: &[BenchRow], path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(rows).expect("bench rows serialize");
    text.push('\n');
    write_bytes(path, text.as_bytes())
}
