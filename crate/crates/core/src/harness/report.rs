//! Report rows, grouped summaries and their CSV / JSON encodings.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{Condition, ExperimentConfig};
use super::run::RunOutput;
use crate::data::TaskKind;
use crate::{Error, Result};

/// One method's result for one trial of one condition.
///
/// For regression `pre_metric` / `post_metric` are test MSE (standardized
/// targets); for classification they are test accuracy. `wall_time` is not
/// part of the serialized row: it goes to a separate timings file so that
/// reports stay byte-reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub task: TaskKind,
    pub method: String,
    pub order: String,
    pub trial: usize,
    pub seed: u64,
    pub parties: usize,
    pub size: Option<usize>,
    pub degree: Option<u32>,
    pub noise: Option<f64>,
    pub width: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub metric: String,
    pub pre_metric: f64,
    pub post_metric: f64,
    pub test_loss: f64,
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub auc: Option<f64>,
    pub stage_losses: String,
    #[serde(skip)]
    pub wall_time: f64,
}

impl ReportRow {
    pub fn condition(&self) -> Condition {
        Condition {
            size: self.size,
            degree: self.degree,
            noise: self.noise,
            width: self.width,
            epochs: self.epochs,
            batch_size: self.batch_size,
        }
    }
}

/// Per-epoch test metrics of one method run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub condition: usize,
    pub trial: usize,
    pub method: String,
    pub order: String,
    pub stage: String,
    pub epoch: usize,
    pub test_loss: f64,
    pub test_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Mean and sample standard deviation over the trials (and transfer orders)
/// of one (method, condition) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub parties: usize,
    pub size: Option<usize>,
    pub degree: Option<u32>,
    pub noise: Option<f64>,
    pub width: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub runs: usize,
    pub pre_mean: f64,
    pub pre_std: f64,
    pub post_mean: f64,
    pub post_std: f64,
    pub accuracy_mean: Option<f64>,
    pub accuracy_std: Option<f64>,
    pub precision_mean: Option<f64>,
    pub precision_std: Option<f64>,
    pub recall_mean: Option<f64>,
    pub recall_std: Option<f64>,
    pub f1_mean: Option<f64>,
    pub f1_std: Option<f64>,
    pub auc_mean: Option<f64>,
    pub auc_std: Option<f64>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn optional_stats(rows: &[&ReportRow], get: impl Fn(&ReportRow) -> Option<f64>) -> (Option<f64>, Option<f64>) {
    let values: Option<Vec<f64>> = rows.iter().map(|r| get(r)).collect();
    match values {
        Some(v) if !v.is_empty() => {
            let (m, s) = mean_std(&v);
            (Some(m), Some(s))
        }
        _ => (None, None),
    }
}

/// Groups rows by (method, condition) in order of first appearance.
pub fn summarize(rows: &[ReportRow]) -> Vec<SummaryRow> {
    let mut groups: Vec<(String, usize, Condition, Vec<&ReportRow>)> = Vec::new();
    for row in rows {
        let cond = row.condition();
        match groups
            .iter_mut()
            .find(|(m, p, c, _)| *m == row.method && *p == row.parties && *c == cond)
        {
            Some(g) => g.3.push(row),
            None => groups.push((row.method.clone(), row.parties, cond, vec![row])),
        }
    }
    groups
        .into_iter()
        .map(|(method, parties, c, rows)| {
            let pre: Vec<f64> = rows.iter().map(|r| r.pre_metric).collect();
            let post: Vec<f64> = rows.iter().map(|r| r.post_metric).collect();
            let (pre_mean, pre_std) = mean_std(&pre);
            let (post_mean, post_std) = mean_std(&post);
            let (accuracy_mean, accuracy_std) = optional_stats(&rows, |r| r.accuracy);
            let (precision_mean, precision_std) = optional_stats(&rows, |r| r.precision);
            let (recall_mean, recall_std) = optional_stats(&rows, |r| r.recall);
            let (f1_mean, f1_std) = optional_stats(&rows, |r| r.f1);
            let (auc_mean, auc_std) = optional_stats(&rows, |r| r.auc);
            SummaryRow {
                method,
                parties,
                size: c.size,
                degree: c.degree,
                noise: c.noise,
                width: c.width,
                epochs: c.epochs,
                batch_size: c.batch_size,
                runs: rows.len(),
                pre_mean,
                pre_std,
                post_mean,
                post_std,
                accuracy_mean,
                accuracy_std,
                precision_mean,
                precision_std,
                recall_mean,
                recall_std,
                f1_mean,
                f1_std,
                auc_mean,
                auc_std,
            }
        })
        .collect()
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Data(format!("{}: {other:?}", path.display())),
    }
}

fn write_csv_records<T: Serialize>(records: &[T], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for r in records {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the rows as CSV (one line per row, fixed column order) or as a
/// JSON array.
pub fn emit_report(rows: &[ReportRow], format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if rows.is_empty() {
        return Err(Error::Data("no report rows to write".into()));
    }
    match format {
        ReportFormat::Csv => write_csv_records(rows, path),
        ReportFormat::Json => {
            let text = serde_json::to_string_pretty(rows).map_err(|e| Error::Data(e.to_string()))?;
            fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
        }
    }
}

pub fn read_rows_csv(path: impl AsRef<Path>) -> Result<Vec<ReportRow>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    reader
        .deserialize()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::Parse {
                row: i + 1,
                message: format!("{}: {e}", path.display()),
            })
        })
        .collect()
}

#[derive(Serialize)]
struct SummaryDocument<'a> {
    config: &'a ExperimentConfig,
    summary: &'a [SummaryRow],
}

/// Writes every artefact of a run into `dir`:
///
/// * `report.csv`, `report.json`: one row per method run
/// * `summary.csv`, `summary.json`: mean ± std per (method, condition)
/// * `trace.csv`: per-epoch test metrics, when tracing was on
/// * `roc/*.csv`: ROC curves (classification)
/// * `timings.csv`: wall-clock seconds per row (not reproducible)
pub fn write_outputs(cfg: &ExperimentConfig, out: &RunOutput, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    emit_report(&out.rows, ReportFormat::Csv, dir.join("report.csv"))?;
    emit_report(&out.rows, ReportFormat::Json, dir.join("report.json"))?;

    let summary = summarize(&out.rows);
    write_csv_records(&summary, &dir.join("summary.csv"))?;
    let doc = SummaryDocument {
        config: cfg,
        summary: &summary,
    };
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Data(e.to_string()))?;
    let path = dir.join("summary.json");
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;

    if !out.traces.is_empty() {
        write_csv_records(&out.traces, &dir.join("trace.csv"))?;
    }
    if !out.rocs.is_empty() {
        let roc_dir = dir.join("roc");
        fs::create_dir_all(&roc_dir).map_err(|e| Error::io(&roc_dir, e))?;
        for (name, curve) in &out.rocs {
            let path = roc_dir.join(format!("{name}.csv"));
            let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            curve.write_csv(std::io::BufWriter::new(file)).map_err(|e| Error::io(&path, e))?;
        }
    }

    let path = dir.join("timings.csv");
    let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut text = String::from("method,order,trial,seed,wall_time_s\n");
    for r in &out.rows {
        text.push_str(&format!("{},{},{},{},{:.6}\n", r.method, r.order, r.trial, r.seed, r.wall_time));
    }
    f.write_all(text.as_bytes()).map_err(|e| Error::io(&path, e))
}
