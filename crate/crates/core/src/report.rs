//! Ranking table output as markdown, CSV or aligned plain text.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::index::RankingTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Markdown,
    Csv,
    Plain,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            "csv" => Ok(OutputFormat::Csv),
            "plain" | "text" => Ok(OutputFormat::Plain),
            other => Err(format!("unknown format {other:?} (expected markdown, csv or plain)")),
        }
    }
}

fn cells(table: &RankingTable) -> Vec<Vec<String>> {
    table
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![r.task_text.clone()];
            row.extend(r.points.iter().map(u8::to_string));
            row.push(r.total.to_string());
            row
        })
        .collect()
}

fn md_cell(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .replace('\\', "\\\\")
        .replace('|', "\\|")
}

/// A header row plus data rows, all cells already rendered as text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Columns rendered right-aligned (markdown and plain).
    pub numeric: Vec<bool>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table {
            header: header.iter().map(|h| h.as_ref().to_owned()).collect(),
            rows: Vec::new(),
            numeric: vec![false; header.len()],
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

impl From<&RankingTable> for Table {
    fn from(t: &RankingTable) -> Self {
        let mut table = Table::new(&t.header);
        table.numeric = (0..t.header.len()).map(|i| i > 0).collect();
        table.rows = cells(t);
        table
    }
}

pub fn emit_markdown(table: &Table) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "| {} |", table.header.join(" | "));
    let sep: Vec<&str> = table.numeric.iter().map(|n| if *n { "---:" } else { "---" }).collect();
    let _ = writeln!(out, "| {} |", sep.join(" | "));
    for row in &table.rows {
        let row: Vec<String> = row.iter().map(|c| md_cell(c)).collect();
        let _ = writeln!(out, "| {} |", row.join(" | "));
    }
    out
}

pub fn emit_csv(table: &Table) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&table.header).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

pub fn emit_plain(table: &Table) -> String {
    let widths: Vec<usize> = (0..table.header.len())
        .map(|i| {
            table
                .rows
                .iter()
                .map(|r| r[i].chars().count())
                .chain(std::iter::once(table.header[i].chars().count()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |r: &[String]| {
        r.iter()
            .enumerate()
            .map(|(i, c)| {
                if table.numeric[i] {
                    format!("{c:>w$}", w = widths[i])
                } else {
                    format!("{c:<w$}", w = widths[i])
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_owned()
    };
    let mut out = String::new();
    let _ = writeln!(out, "{}", line(&table.header));
    for r in &table.rows {
        let _ = writeln!(out, "{}", line(r));
    }
    out
}

pub fn emit(table: &Table, format: OutputFormat) -> String {
    match format {
        OutputFormat::Markdown => emit_markdown(table),
        OutputFormat::Csv => emit_csv(table),
        OutputFormat::Plain => emit_plain(table),
    }
}

/// Markdown table with the seven ranking headers, rows in rank order.
pub fn emit_ranking_markdown(table: &RankingTable) -> String {
    emit_markdown(&table.into())
}

pub fn emit_ranking_csv(table: &RankingTable) -> String {
    emit_csv(&table.into())
}

pub fn emit_ranking_plain(table: &RankingTable) -> String {
    emit_plain(&table.into())
}

pub fn emit_ranking(table: &RankingTable, format: OutputFormat) -> String {
    emit(&table.into(), format)
}
