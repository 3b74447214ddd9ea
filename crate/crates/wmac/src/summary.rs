//! JSON run summaries.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use wmac_core::metrics::{ComparisonTable, RunSummary};
use wmac_core::scenario::ScenarioSpec;
use wmac_core::simulation::{RunOutput, SimConfig};

use crate::error::{CliError, Result};

/// The fully resolved inputs of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub scenario: ScenarioSpec,
    pub sim: SimConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub label: String,
    pub scenario_id: String,
    pub config: ConfigEcho,
    pub reallocations: usize,
    #[serde(flatten)]
    pub summary: RunSummary,
}

impl RunReport {
    pub fn new(label: impl Into<String>, spec: &ScenarioSpec, sim: &SimConfig, run: &RunOutput) -> Self {
        Self {
            label: label.into(),
            scenario_id: spec.id.clone(),
            config: ConfigEcho {
                scenario: spec.clone(),
                sim: *sim,
            },
            reallocations: run.reallocations,
            summary: run.summary.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SummaryDocument {
    pub runs: Vec<RunReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tables: Vec<ComparisonTable>,
}

pub fn to_json(doc: &SummaryDocument) -> Result<String> {
    serde_json::to_string_pretty(doc).map_err(|e| CliError::Format(format!("encoding summary: {e}")))
}

pub fn write_summary_json(doc: &SummaryDocument, path: &Path) -> Result<()> {
    let text = to_json(doc)?;
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes())
        .and_then(|_| w.write_all(b"\n"))
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

pub fn read_summary_json(path: &Path) -> Result<SummaryDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
}
