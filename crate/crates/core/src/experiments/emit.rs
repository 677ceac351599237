//! CSV and JSON output. Both carry the tool version, config hash and seed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};

use super::config::{ExperimentConfig, OutputFormat};
use super::run::{TrialResult, TrialStatus};
use super::stats::{fmt12, SummaryStats};

pub const TOOL_NAME: &str = "geochoice";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CSV_HEADER: &str = "tool_version,config_hash,seed,trial,stream,r,k,metric,label,checkpoint,value";

/// Everything written to a JSON result file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    /// Canonical text of the result-determining config keys.
    pub config: String,
    pub summary: Option<SummaryStats>,
    /// Why there is no summary (no successful trial).
    pub summary_error: Option<String>,
    pub trials: Vec<TrialResult>,
}

impl Report {
    pub fn new(cfg: &ExperimentConfig, trials: Vec<TrialResult>, summary: &Result<SummaryStats>) -> Self {
        let (summary, summary_error) = match summary {
            Ok(s) => (Some(s.clone()), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Self {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
            config: cfg.to_hashed_text(),
            summary,
            summary_error,
            trials,
        }
    }
}

/// One row per (trial, metric, checkpoint, value). A failed trial adds a
/// `failed` row; its reason is only in the JSON output.
pub fn write_csv<W: Write>(mut w: W, cfg: &ExperimentConfig, results: &[TrialResult]) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    let hash = cfg.hash();
    for t in results {
        let prefix = format!("{TOOL_VERSION},{hash},{},{},{},{}", cfg.seed, t.index, t.stream, fmt12(t.r));
        for o in &t.outcomes {
            writeln!(w, "{prefix},{},{},{},{},{}", o.k, o.metric, o.label, o.checkpoint, fmt12(o.value))?;
        }
        if let TrialStatus::Failed { .. } = t.status {
            writeln!(w, "{prefix},0,failed,status,0,1")?;
        }
    }
    w.flush()
}

pub fn write_json<W: Write>(w: W, report: &Report) -> std::io::Result<()> {
    serde_json::to_writer_pretty(w, report).map_err(std::io::Error::other)
}

/// Writes `results` to `path` in `format`; IO errors name the path.
pub fn emit(
    path: &Path,
    format: OutputFormat,
    cfg: &ExperimentConfig,
    results: &[TrialResult],
    summary: &Result<SummaryStats>,
) -> Result<()> {
    let io = |e| GeoError::io(path, e);
    let file = BufWriter::new(File::create(path).map_err(io)?);
    match format {
        OutputFormat::Csv => write_csv(file, cfg, results).map_err(io),
        OutputFormat::Json => write_json(file, &Report::new(cfg, results.to_vec(), summary)).map_err(io),
    }
}

pub fn read_json(path: &Path) -> Result<Report> {
    let file = File::open(path).map_err(|e| GeoError::io(path, e))?;
    serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| GeoError::io(path, std::io::Error::new(std::io::ErrorKind::InvalidData, e)))
}
