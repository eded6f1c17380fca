//! File outputs: ranking and heatmap CSVs, validation tables, and a JSON
//! run report.
//!
//! Every writer is deterministic: the same inputs produce the same bytes, so
//! runs can be diffed. Floats are printed with the shortest representation
//! that parses back to the identical value, and `report.json` carries no
//! timestamps.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ml::{FitReport, ModelKind};
use crate::risk::{Measure, Ranking, RiskConfig};
use crate::sweep::HeatmapData;

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Ingestion(format!("{}: {e}", path.display()))
}

/// Create `dir` (and parents) if missing.
pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Write `ranking_<name>.csv` with columns `rank,stock,total`.
pub fn write_ranking_csv(dir: &Path, name: &str, ranking: &Ranking) -> Result<PathBuf> {
    let path = dir.join(format!("ranking_{name}.csv"));
    let mut out = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
    out.write_record(["rank", "stock", "total"])
        .map_err(|e| csv_error(&path, e))?;
    for entry in ranking.entries() {
        out.write_record([
            entry.rank.to_string(),
            entry.label.clone(),
            entry.score.total.to_string(),
        ])
        .map_err(|e| csv_error(&path, e))?;
    }
    out.flush().map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// One heatmap CSV record. Mirrors [`write_heatmap_csv`]'s column layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapRow {
    pub stock: String,
    pub q: f64,
    pub lambda: f64,
    pub measure: Measure,
    pub total: f64,
    pub entropy_term: f64,
    pub variance_term: f64,
    pub utility_term: f64,
}

/// Write `heatmap_<measure>.csv` with one row per `(stock, q, lambda)`.
pub fn write_heatmap_csv(dir: &Path, heatmap: &HeatmapData) -> Result<PathBuf> {
    let path = dir.join(format!("heatmap_{}.csv", heatmap.measure().name()));
    let mut out = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
    for point in heatmap.points() {
        out.serialize(HeatmapRow {
            stock: point.stock.to_string(),
            q: point.q,
            lambda: point.lambda,
            measure: heatmap.measure(),
            total: point.score.total,
            entropy_term: point.score.entropy_term,
            variance_term: point.score.variance_term,
            utility_term: point.score.utility_term,
        })
        .map_err(|e| csv_error(&path, e))?;
    }
    out.flush().map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Read a heatmap CSV back. Values round-trip bit-exactly.
pub fn read_heatmap_csv(path: &Path) -> Result<Vec<HeatmapRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    reader
        .deserialize()
        .map(|row| row.map_err(|e| csv_error(path, e)))
        .collect()
}

/// Held-out and training fit quality of one model on one measure's target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationEntry {
    pub model: ModelKind,
    pub measure: Measure,
    pub mse: f64,
    pub r2: f64,
    pub train_mse: f64,
    pub train_r2: f64,
}

impl ValidationEntry {
    pub fn from_fit(measure: Measure, fit: &FitReport) -> ValidationEntry {
        ValidationEntry {
            model: fit.model,
            measure,
            mse: fit.mse,
            r2: fit.r2,
            train_mse: fit.train_mse,
            train_r2: fit.train_r2,
        }
    }
}

fn present_models(entries: &[ValidationEntry]) -> Vec<ModelKind> {
    ModelKind::ALL
        .into_iter()
        .filter(|m| entries.iter().any(|e| e.model == *m))
        .collect()
}

fn present_measures(entries: &[ValidationEntry]) -> Vec<Measure> {
    Measure::ALL
        .into_iter()
        .filter(|m| entries.iter().any(|e| e.measure == *m))
        .collect()
}

/// Write `validation_summary.csv`: one row per model, a `<measure>_mse` and
/// `<measure>_r2` column pair per measure. Held-out metrics only; cells for
/// combinations that were not fitted are left empty.
pub fn write_validation_summary(dir: &Path, entries: &[ValidationEntry]) -> Result<PathBuf> {
    let path = dir.join("validation_summary.csv");
    let measures = present_measures(entries);
    let mut out = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
    let mut header = vec!["model".to_string()];
    for m in &measures {
        header.push(format!("{}_mse", m.name()));
        header.push(format!("{}_r2", m.name()));
    }
    out.write_record(&header).map_err(|e| csv_error(&path, e))?;
    for model in present_models(entries) {
        let mut record = vec![model.name().to_string()];
        for measure in &measures {
            match entries
                .iter()
                .find(|e| e.model == model && e.measure == *measure)
            {
                Some(e) => {
                    record.push(e.mse.to_string());
                    record.push(e.r2.to_string());
                }
                None => {
                    record.push(String::new());
                    record.push(String::new());
                }
            }
        }
        out.write_record(&record).map_err(|e| csv_error(&path, e))?;
    }
    out.flush().map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Write `r2_long.csv` with columns `model,measure,mse,r2`, model-major.
pub fn write_r2_long(dir: &Path, entries: &[ValidationEntry]) -> Result<PathBuf> {
    let path = dir.join("r2_long.csv");
    let mut out = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
    out.write_record(["model", "measure", "mse", "r2"])
        .map_err(|e| csv_error(&path, e))?;
    for model in present_models(entries) {
        for measure in present_measures(entries) {
            if let Some(e) = entries
                .iter()
                .find(|e| e.model == model && e.measure == measure)
            {
                out.write_record([
                    model.name().to_string(),
                    measure.name().to_string(),
                    e.mse.to_string(),
                    e.r2.to_string(),
                ])
                .map_err(|e| csv_error(&path, e))?;
            }
        }
    }
    out.flush().map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// What produced a run: tool version, subcommand, seeds and configuration.
/// Deliberately contains nothing volatile (no timestamps, no paths).
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub version: String,
    pub command: String,
    pub config: RiskConfig,
    pub seed: Option<u64>,
    pub split_seed: Option<u64>,
    pub bins: Option<usize>,
    pub features: Vec<String>,
    pub notes: Vec<String>,
}

impl RunMetadata {
    pub fn new(command: &str, config: RiskConfig) -> RunMetadata {
        RunMetadata {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            seed: None,
            split_seed: None,
            bins: None,
            features: Vec::new(),
            notes: Vec::new(),
        }
    }
}

/// Everything a run wants to persist besides the CSV tables.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub metadata: RunMetadata,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub rankings: BTreeMap<String, Ranking>,
    /// Omitted entirely when the run fit no models.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub validation: Vec<ValidationEntry>,
    /// File names (relative to the output directory) written by the run.
    pub outputs: Vec<String>,
}

impl Report {
    pub fn new(metadata: RunMetadata) -> Report {
        Report {
            metadata,
            rankings: BTreeMap::new(),
            validation: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn record_output(&mut self, path: &Path) {
        if let Some(name) = path.file_name() {
            self.outputs.push(name.to_string_lossy().into_owned());
        }
    }
}

/// Write `report.json`, pretty-printed with a trailing newline.
pub fn write_report_json(dir: &Path, report: &Report) -> Result<PathBuf> {
    let path = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Ingestion(format!("{}: {e}", path.display())))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
