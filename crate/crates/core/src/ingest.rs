//! Reading task descriptions from plain-text lists and CSV files.

use std::io::{BufRead, Read};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Source, TaskDescription};
use crate::text::strip_list_marker;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read input: {0}")]
    Unreadable(#[from] std::io::Error),
    #[error("column {0:?} not found in the header row")]
    MissingColumn(String),
    #[error("malformed CSV: {0}")]
    MalformedCsv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based line number (text) or data-row number (CSV, header excluded).
    pub record: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub source: String,
    pub accepted: usize,
    pub rejected: Vec<Rejection>,
}

impl IngestReport {
    pub fn total(&self) -> usize {
        self.accepted + self.rejected.len()
    }
}

/// Ids are `<prefix>-<n>` with n counted over accepted tasks from 1.
fn task_id(prefix: &str, n: usize) -> String {
    format!("{prefix}-{n}")
}

/// One task per non-blank line, bullets and numbering removed. Blank lines
/// are not records and are not counted.
pub fn ingest_text<R: BufRead>(
    reader: R,
    id_prefix: &str,
    source_label: &str,
) -> Result<(Vec<TaskDescription>, IngestReport), IngestError> {
    let mut tasks = Vec::new();
    let mut rejected = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let text = strip_list_marker(&line);
        match TaskDescription::new(task_id(id_prefix, tasks.len() + 1), text, Source::Ingested) {
            Ok(t) => tasks.push(t),
            Err(e) => rejected.push(Rejection {
                record: i + 1,
                reason: e.to_string(),
            }),
        }
    }
    let report = IngestReport {
        source: source_label.to_owned(),
        accepted: tasks.len(),
        rejected,
    };
    Ok((tasks, report))
}

/// Which CSV columns hold what. Unmapped ids are generated from the prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMapping {
    pub text: String,
    pub id: Option<String>,
    pub source: Option<String>,
}

impl ColumnMapping {
    pub fn text(column: impl Into<String>) -> Self {
        ColumnMapping {
            text: column.into(),
            id: None,
            source: None,
        }
    }
}

pub fn ingest_csv<R: Read>(
    reader: R,
    mapping: &ColumnMapping,
    id_prefix: &str,
    source_label: &str,
) -> Result<(Vec<TaskDescription>, IngestReport), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_owned()))
    };
    let text_col = col(&mapping.text)?;
    let id_col = mapping.id.as_deref().map(col).transpose()?;
    let source_col = mapping.source.as_deref().map(col).transpose()?;

    let mut tasks: Vec<TaskDescription> = Vec::new();
    let mut rejected = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let reject = |reason: String| Rejection { record: row, reason };
        let text = record.get(text_col).unwrap_or("").trim();
        if text.is_empty() {
            rejected.push(reject("empty task text".into()));
            continue;
        }
        let id = match id_col {
            Some(c) => record.get(c).unwrap_or("").trim().to_owned(),
            None => task_id(id_prefix, tasks.len() + 1),
        };
        if id.is_empty() {
            rejected.push(reject("empty id".into()));
            continue;
        }
        if tasks.iter().any(|t| t.id == id) {
            rejected.push(reject(format!("duplicate id {id:?}")));
            continue;
        }
        let source = match source_col.and_then(|c| record.get(c)).map(str::trim) {
            Some(s) if !s.is_empty() => match s.parse::<Source>() {
                Ok(src) => src,
                Err(e) => {
                    rejected.push(reject(e));
                    continue;
                }
            },
            _ => Source::Ingested,
        };
        match TaskDescription::new(id, text, source) {
            Ok(t) => tasks.push(t),
            Err(e) => rejected.push(reject(e.to_string())),
        }
    }
    let report = IngestReport {
        source: source_label.to_owned(),
        accepted: tasks.len(),
        rejected,
    };
    Ok((tasks, report))
}
