use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use super::{ExperimentReport, ReportRow};
use crate::model::TemporalBipartiteGraph;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    /// Long-form CSV plus a provenance JSON sidecar.
    #[default]
    Csv,
    /// One JSON document with rows and provenance.
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidParameter(format!("report format must be csv or json, got `{other}`"))),
        }
    }
}

const COLUMNS: [&str; 7] = ["experiment", "algorithm", "parameter", "sample", "seed", "metric", "value"];

/// Writes rows as `experiment,algorithm,parameter,sample,seed,metric,value`.
pub fn write_report_csv<W: Write>(sink: W, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record([
            r.experiment.as_str(),
            &r.algorithm,
            &r.parameter,
            &r.sample.map(|s| s.to_string()).unwrap_or_default(),
            &r.seed.map(|s| s.to_string()).unwrap_or_default(),
            &r.metric,
            &r.value.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report_csv<R: Read>(source: R) -> Result<Vec<ReportRow>> {
    let mut reader = crate::model::io::csv_reader(source);
    crate::model::io::check_header(&mut reader, &COLUMNS)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(crate::model::io::csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |what: &str| Error::Parse {
            line,
            message: format!("bad {what}"),
        };
        if record.len() != COLUMNS.len() {
            return Err(bad("field count"));
        }
        rows.push(ReportRow {
            experiment: record[0].to_string(),
            algorithm: record[1].to_string(),
            parameter: record[2].to_string(),
            sample: non_empty(&record[3]).map(str::parse).transpose().map_err(|_| bad("sample"))?,
            seed: non_empty(&record[4]).map(str::parse).transpose().map_err(|_| bad("seed"))?,
            metric: record[5].to_string(),
            value: record[6].parse().map_err(|_| bad("value"))?,
        });
    }
    Ok(rows)
}

fn non_empty(s: &str) -> Option<&str> {
    (!s.is_empty()).then_some(s)
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes the report under `dir`: `<experiment>.csv` and
/// `<experiment>.provenance.json`, or `<experiment>.json`. Returns the paths.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    if report.rows.is_empty() {
        return Err(Error::Config(format!("{} report has no rows", report.experiment)));
    }
    fs::create_dir_all(dir)?;
    let stem = report.experiment;
    match format {
        ReportFormat::Csv => {
            let mut csv = Vec::new();
            write_report_csv(&mut csv, &report.rows)?;
            let prov = json_bytes(&report.provenance)?;
            let csv_path = dir.join(format!("{stem}.csv"));
            let prov_path = dir.join(format!("{stem}.provenance.json"));
            write_atomic(&csv_path, &csv)?;
            write_atomic(&prov_path, &prov)?;
            Ok(vec![csv_path, prov_path])
        }
        ReportFormat::Json => {
            let path = dir.join(format!("{stem}.json"));
            write_atomic(&path, &json_bytes(report)?)?;
            Ok(vec![path])
        }
    }
}

/// Ratings, active users and active items in one year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct YearCount {
    pub year: i32,
    pub ratings: usize,
    pub users: usize,
    pub items: usize,
}

pub fn year_counts(graph: &TemporalBipartiteGraph) -> Vec<YearCount> {
    graph
        .slices()
        .iter()
        .map(|s| YearCount {
            year: s.year(),
            ratings: s.n_ratings(),
            users: s.users().len(),
            items: s.items().len(),
        })
        .collect()
}

/// Size and degree summary of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub users: usize,
    pub items: usize,
    pub ratings: usize,
    pub first_year: i32,
    pub last_year: i32,
    pub mean_user_degree: f64,
    pub mean_item_degree: f64,
    pub sparsity: f64,
    pub scale: String,
}

impl DatasetSummary {
    pub fn of(graph: &TemporalBipartiteGraph) -> Self {
        Self {
            users: graph.n_users(),
            items: graph.n_items(),
            ratings: graph.n_events(),
            first_year: graph.first_year(),
            last_year: graph.last_year(),
            mean_user_degree: graph.mean_user_degree(),
            mean_item_degree: graph.mean_item_degree(),
            sparsity: graph.n_events() as f64 / (graph.n_users() as f64 * graph.n_items() as f64),
            scale: graph.scale().to_string(),
        }
    }
}

/// Writes `year_counts.csv` and `dataset.json` under `dir`.
pub fn emit_year_counts(graph: &TemporalBipartiteGraph, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(["year", "ratings", "users", "items"])?;
    for c in year_counts(graph) {
        w.write_record([c.year.to_string(), c.ratings.to_string(), c.users.to_string(), c.items.to_string()])?;
    }
    let csv = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let counts = dir.join("year_counts.csv");
    let summary = dir.join("dataset.json");
    write_atomic(&counts, &csv)?;
    write_atomic(&summary, &json_bytes(&DatasetSummary::of(graph))?)?;
    Ok(vec![counts, summary])
}
