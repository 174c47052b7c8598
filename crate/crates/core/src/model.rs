//! Shared domain vocabulary: task descriptions, identifiers, deadlines,
//! statuses and validation reports.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors produced by the primitive validators in this module.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("empty input")]
    EmptyInput,
    #[error("illegal character {ch:?} at position {position}")]
    IllegalCharacter { ch: char, position: usize },
    #[error("length {len} out of range (4-64)")]
    LengthOutOfRange { len: usize },
    #[error("{0:?} does not match MM/DD/YYYY")]
    FormatMismatch(String),
    #[error("{0} is not a calendar date")]
    ImpossibleDate(String),
    #[error("unknown status {0:?} (expected completed, in progress, pending or canceled)")]
    UnknownStatus(String),
    #[error("task text is empty")]
    EmptyText,
    #[error("task id is empty")]
    EmptyId,
    #[error("task {0} lists itself as its parent")]
    SelfParent(String),
}

pub const UNIQUE_ID_MIN_LEN: usize = 4;
pub const UNIQUE_ID_MAX_LEN: usize = 64;

/// Template identifier: 4 to 64 characters from `[A-Za-z0-9-]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct UniqueId(String);

impl UniqueId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UniqueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for UniqueId {
    type Error = ModelError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        validate_unique_id(&value)
    }
}

impl From<UniqueId> for String {
    fn from(id: UniqueId) -> Self {
        id.0
    }
}

impl FromStr for UniqueId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        validate_unique_id(s)
    }
}

/// Checks the charset before the length so the error names the first
/// violated constraint a reader would notice.
pub fn validate_unique_id(candidate: &str) -> Result<UniqueId, ModelError> {
    if candidate.is_empty() {
        return Err(ModelError::EmptyInput);
    }
    if let Some((position, ch)) = candidate
        .chars()
        .enumerate()
        .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '-'))
    {
        return Err(ModelError::IllegalCharacter { ch, position });
    }
    let len = candidate.len();
    if !(UNIQUE_ID_MIN_LEN..=UNIQUE_ID_MAX_LEN).contains(&len) {
        return Err(ModelError::LengthOutOfRange { len });
    }
    Ok(UniqueId(candidate.to_owned()))
}

/// A calendar date rendered and parsed strictly as `MM/DD/YYYY`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Deadline(NaiveDate);

impl Deadline {
    pub fn new(month: u32, day: u32, year: i32) -> Result<Self, ModelError> {
        if !(1000..=9999).contains(&year) {
            return Err(ModelError::ImpossibleDate(format!("{month:02}/{day:02}/{year}")));
        }
        NaiveDate::from_ymd_opt(year, month, day)
            .map(Deadline)
            .ok_or_else(|| ModelError::ImpossibleDate(format!("{month:02}/{day:02}/{year:04}")))
    }

    pub fn month(&self) -> u32 {
        self.0.month()
    }

    pub fn day(&self) -> u32 {
        self.0.day()
    }

    pub fn year(&self) -> i32 {
        self.0.year()
    }

    pub fn date(&self) -> NaiveDate {
        self.0
    }

    pub fn render(&self) -> String {
        format!("{:02}/{:02}/{:04}", self.month(), self.day(), self.year())
    }
}

impl fmt::Display for Deadline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl FromStr for Deadline {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_deadline(s)
    }
}

impl Serialize for Deadline {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for Deadline {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        parse_deadline(&raw).map_err(serde::de::Error::custom)
    }
}

/// Strict `MM/DD/YYYY` parse: two-digit month, two-digit day, four-digit
/// year, slash separators, nothing else.
pub fn parse_deadline(candidate: &str) -> Result<Deadline, ModelError> {
    let bytes = candidate.as_bytes();
    let shape_ok = bytes.len() == 10
        && bytes[2] == b'/'
        && bytes[5] == b'/'
        && bytes
            .iter()
            .enumerate()
            .all(|(i, b)| i == 2 || i == 5 || b.is_ascii_digit());
    if !shape_ok {
        return Err(ModelError::FormatMismatch(candidate.to_owned()));
    }
    let month: u32 = candidate[0..2].parse().expect("two ascii digits");
    let day: u32 = candidate[3..5].parse().expect("two ascii digits");
    let year: i32 = candidate[6..10].parse().expect("four ascii digits");
    NaiveDate::from_ymd_opt(year, month, day)
        .filter(|_| year >= 1000)
        .map(Deadline)
        .ok_or_else(|| ModelError::ImpossibleDate(candidate.to_owned()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Completed,
    InProgress,
    Pending,
    Canceled,
}

impl TaskStatus {
    pub const ALL: [TaskStatus; 4] = [
        TaskStatus::Completed,
        TaskStatus::InProgress,
        TaskStatus::Pending,
        TaskStatus::Canceled,
    ];

    /// Canonical lowercase form, as written in the template definition.
    pub fn as_str(&self) -> &'static str {
        match self {
            TaskStatus::Completed => "completed",
            TaskStatus::InProgress => "in progress",
            TaskStatus::Pending => "pending",
            TaskStatus::Canceled => "canceled",
        }
    }
}

impl fmt::Display for TaskStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskStatus {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_status(s)
    }
}

/// Case-insensitive match against the four canonical statuses. Runs of
/// whitespace are collapsed, so `"In  progress"` is accepted too.
pub fn parse_status(candidate: &str) -> Result<TaskStatus, ModelError> {
    let normalized = candidate
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase();
    TaskStatus::ALL
        .into_iter()
        .find(|s| s.as_str() == normalized)
        .ok_or_else(|| ModelError::UnknownStatus(candidate.to_owned()))
}

/// Where a task description came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    #[default]
    Manual,
    Ingested,
    LlmDerived,
    DecompositionChild,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Manual => "manual",
            Source::Ingested => "ingested",
            Source::LlmDerived => "llm-derived",
            Source::DecompositionChild => "decomposition-child",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "manual" => Ok(Source::Manual),
            "ingested" => Ok(Source::Ingested),
            "llm-derived" => Ok(Source::LlmDerived),
            "decomposition-child" => Ok(Source::DecompositionChild),
            other => Err(format!("unknown source {other:?}")),
        }
    }
}

/// A candidate task: raw sentence plus identity and provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskDescription {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<String>,
}

impl TaskDescription {
    pub fn new(id: impl Into<String>, text: impl Into<String>, source: Source) -> Result<Self, ModelError> {
        let task = TaskDescription {
            id: id.into(),
            text: text.into(),
            source,
            parent_id: None,
        };
        task.check()?;
        Ok(task)
    }

    pub fn with_parent(mut self, parent_id: impl Into<String>) -> Result<Self, ModelError> {
        self.parent_id = Some(parent_id.into());
        self.check()?;
        Ok(self)
    }

    /// Checks the invariants that do not need a registry to evaluate.
    pub fn check(&self) -> Result<(), ModelError> {
        if self.id.is_empty() {
            return Err(ModelError::EmptyId);
        }
        if self.text.trim().is_empty() {
            return Err(ModelError::EmptyText);
        }
        if self.parent_id.as_deref() == Some(self.id.as_str()) {
            return Err(ModelError::SelfParent(self.id.clone()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub field: String,
    pub severity: Severity,
    pub message: String,
}

/// Findings for one subject. `ok` is kept in step with the findings: it is
/// true exactly when no finding is an error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    subject_id: String,
    findings: Vec<Finding>,
    ok: bool,
}

impl ValidationReport {
    pub fn new(subject_id: impl Into<String>) -> Self {
        ValidationReport {
            subject_id: subject_id.into(),
            findings: Vec::new(),
            ok: true,
        }
    }

    pub fn from_findings(subject_id: impl Into<String>, findings: Vec<Finding>) -> Self {
        let mut report = Self::new(subject_id);
        for f in findings {
            report.push(f);
        }
        report
    }

    pub fn push(&mut self, finding: Finding) {
        if finding.severity == Severity::Error {
            self.ok = false;
        }
        self.findings.push(finding);
    }

    pub fn error(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.push(Finding {
            field: field.into(),
            severity: Severity::Error,
            message: message.into(),
        });
    }

    pub fn warning(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.push(Finding {
            field: field.into(),
            severity: Severity::Warning,
            message: message.into(),
        });
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn findings(&self) -> &[Finding] {
        &self.findings
    }

    pub fn ok(&self) -> bool {
        self.ok
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Warning)
    }
}
