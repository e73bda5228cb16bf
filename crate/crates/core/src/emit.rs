//! Writing and reading result files.
//!
//! CSV output is a header row followed by one line per sample, numbers in
//! shortest round-trip form with a `.` decimal point. Next to it goes
//! `<stem>.summary.json`, a [`SummaryDocument`] without rows. JSON output is a
//! single [`SummaryDocument`] that includes the rows.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, OutputFormat};
use crate::runner::{Metric, ResultRecord};

pub const SUMMARY_SCHEMA: &str = "intrinsic-arrow/summary/1";

/// Layout of the JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryDocument {
    pub schema: String,
    pub experiment: String,
    pub version: String,
    pub runtime_seconds: f64,
    pub passed: bool,
    pub columns: Vec<String>,
    pub row_count: usize,
    pub summary: Vec<Metric>,
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rows: Option<Vec<Vec<f64>>>,
}

impl SummaryDocument {
    pub fn new(record: &ResultRecord, with_rows: bool) -> Self {
        Self {
            schema: SUMMARY_SCHEMA.to_string(),
            experiment: record.experiment.clone(),
            version: crate::VERSION.to_string(),
            runtime_seconds: record.runtime_seconds,
            passed: record.passed(),
            columns: record.columns.clone(),
            row_count: record.rows.len(),
            summary: record.summary.clone(),
            config: record.config.clone(),
            rows: with_rows.then(|| record.rows.clone()),
        }
    }
}

/// `<dir>/<stem>.summary.json` for a CSV at `path`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map_or_else(|| "results".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}.summary.json"))
}

fn json_error(e: serde_json::Error) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, e)
}

fn write_json(path: &Path, doc: &SummaryDocument) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, doc).map_err(json_error)?;
    out.write_all(b"\n")?;
    out.flush()
}

pub fn write_csv(path: &Path, columns: &[String], rows: &[Vec<f64>]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(columns)?;
    for row in rows {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush()
}

/// Write `record` to `path`; returns the files written.
pub fn emit(record: &ResultRecord, path: &Path, format: OutputFormat) -> io::Result<Vec<PathBuf>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    match format {
        OutputFormat::Csv => {
            write_csv(path, &record.columns, &record.rows)?;
            let sidecar = sidecar_path(path);
            write_json(&sidecar, &SummaryDocument::new(record, false))?;
            Ok(vec![path.to_path_buf(), sidecar])
        }
        OutputFormat::Json => {
            write_json(path, &SummaryDocument::new(record, true))?;
            Ok(vec![path.to_path_buf()])
        }
    }
}

/// Read a CSV written by [`write_csv`].
pub fn read_csv(path: &Path) -> io::Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let columns = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let row = rec?
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|e| {
                    io::Error::new(io::ErrorKind::InvalidData, format!("{field:?}: {e}"))
                })
            })
            .collect::<io::Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((columns, rows))
}

pub fn read_summary(path: &Path) -> io::Result<SummaryDocument> {
    serde_json::from_reader(io::BufReader::new(File::open(path)?)).map_err(json_error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentKind;
    use crate::runner::run_experiment;

    fn record(rows: Vec<Vec<f64>>) -> ResultRecord {
        ResultRecord {
            experiment: "classical".into(),
            columns: vec!["a".into(), "b".into()],
            rows,
            summary: vec![Metric::value("m", 0.25)],
            config: ExperimentConfig::default_for(ExperimentKind::Classical),
            runtime_seconds: 0.5,
        }
    }

    #[test]
    fn empty_rows_still_give_header_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        let files = emit(&record(vec![]), &path, OutputFormat::Csv).unwrap();
        assert_eq!(files[1], dir.path().join("empty.summary.json"));
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n");
        let doc = read_summary(&files[1]).unwrap();
        assert_eq!(doc.row_count, 0);
        assert_eq!(doc.schema, SUMMARY_SCHEMA);
        assert_eq!(doc.version, crate::VERSION);
    }

    #[test]
    fn csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let rows = vec![
            vec![0.1, -3.0],
            vec![1e-300, 123456789.125],
            vec![f64::MAX, 2.0f64.sqrt()],
        ];
        emit(&record(rows.clone()), &path, OutputFormat::Csv).unwrap();
        let (cols, back) = read_csv(&path).unwrap();
        assert_eq!(cols, ["a", "b"]);
        assert_eq!(back, rows);
    }

    #[test]
    fn json_output_embeds_rows_and_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/run.json");
        let mut config = ExperimentConfig::default_for(ExperimentKind::Quantum);
        config.n_samples = 50;
        let rec = run_experiment(&config).unwrap();
        emit(&rec, &path, OutputFormat::Json).unwrap();
        let doc = read_summary(&path).unwrap();
        assert_eq!(doc.rows.as_ref().map(Vec::len), Some(50));
        assert_eq!(doc.config, config);
        assert_eq!(doc.summary, rec.summary);
        let value: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        for key in [
            "schema",
            "experiment",
            "version",
            "runtime_seconds",
            "passed",
            "config",
            "summary",
        ] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn sidecar_naming() {
        assert_eq!(
            sidecar_path(Path::new("out/run.csv")),
            PathBuf::from("out/run.summary.json")
        );
        assert_eq!(
            sidecar_path(Path::new("run")),
            PathBuf::from("run.summary.json")
        );
    }
}
