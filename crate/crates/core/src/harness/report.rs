//! Report records: JSON lines plus a flat CSV summary.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Algorithm, LowerBoundKind};
use crate::error::{Error, Result};
use crate::mapreduce::CommStats;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub algorithm: Algorithm,
    /// Points read so far.
    pub t: u64,
    /// Cost of the reported centers over the points they answer for (the
    /// prefix, or the window for `sliding_window`).
    pub cost: f64,
    pub lower_bound: f64,
    pub lower_bound_kind: LowerBoundKind,
    /// `cost / lower_bound`; absent when the bound is zero.
    pub ratio: Option<f64>,
    pub memory_points: usize,
    /// Update time since the previous checkpoint.
    pub update_seconds: f64,
    pub query_seconds: f64,
    /// Streaming runs only: all update time so far plus this query, the
    /// cost of answering at `t` when starting from scratch.
    pub scratch_seconds: Option<f64>,
    pub centers: Vec<u64>,
    pub comm: Option<CommStats>,
}

/// One CSV row per record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub t: u64,
    pub cost: f64,
    pub lower_bound: f64,
    pub lower_bound_kind: LowerBoundKind,
    pub ratio: Option<f64>,
    pub memory_points: usize,
    pub update_seconds: f64,
    pub query_seconds: f64,
    pub scratch_seconds: Option<f64>,
    pub comm_total: Option<usize>,
}

impl From<&ReportRecord> for SummaryRow {
    fn from(r: &ReportRecord) -> Self {
        SummaryRow {
            algorithm: r.algorithm,
            t: r.t,
            cost: r.cost,
            lower_bound: r.lower_bound,
            lower_bound_kind: r.lower_bound_kind,
            ratio: r.ratio,
            memory_points: r.memory_points,
            update_seconds: r.update_seconds,
            query_seconds: r.query_seconds,
            scratch_seconds: r.scratch_seconds,
            comm_total: r.comm.as_ref().map(|c| c.total),
        }
    }
}

/// `report.jsonl` pairs with `report.csv`.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("csv")
}

/// Appends every record to both files as it arrives, so an aborted run
/// leaves the records emitted so far.
pub struct ReportWriter {
    jsonl: BufWriter<File>,
    csv: csv::Writer<File>,
}

impl ReportWriter {
    pub fn create(out: &Path) -> Result<Self> {
        Ok(ReportWriter {
            jsonl: BufWriter::new(File::create(out)?),
            csv: csv::Writer::from_path(summary_path(out))?,
        })
    }

    pub fn push(&mut self, rec: &ReportRecord) -> Result<()> {
        serde_json::to_writer(&mut self.jsonl, rec)?;
        self.jsonl.write_all(b"\n")?;
        self.jsonl.flush()?;
        self.csv.serialize(SummaryRow::from(rec))?;
        self.csv.flush()?;
        Ok(())
    }
}

pub fn to_jsonl(records: &[ReportRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn read_jsonl(path: &Path) -> Result<Vec<ReportRecord>> {
    let mut records = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i as u64 + 1,
            msg: e.to_string(),
        })?;
        records.push(rec);
    }
    Ok(records)
}

pub fn to_csv(rows: &[SummaryRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::input(e.to_string()))
}

pub fn read_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}
