//! The 16-part task specification template.
//!
//! Field contents are kept as the strings the author wrote. Typed values
//! (deadline, statuses, unique id) are parsed on demand, so a draft that came
//! back from a model with a malformed date still loads and `validate` can
//! point at the problem.

mod readiness;
mod validate;

pub use readiness::{readiness_report, AIReadinessReport, ChecklistEntry, ReadinessOptions, ScoreSummary};
pub use validate::check_steps;

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formulation::{analyze_actions, Lexicon};
use crate::model::{
    parse_deadline, parse_status, validate_unique_id, Deadline, ModelError, TaskDescription, TaskStatus, UniqueId,
};
use crate::text::strip_list_marker;

/// Agent placeholder for templates without an assignee.
pub const UNASSIGNED_AGENT: &str = "TBD";

const ID_STOP_WORDS: &[&str] = &["with", "the", "for", "a", "an", "of", "to"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("unknown template field {0:?}")]
    UnknownField(String),
    #[error("{field}: {source}")]
    FieldValidation {
        field: TemplateField,
        #[source]
        source: ModelError,
    },
    #[error("{field}: {reason}")]
    InvalidValue { field: TemplateField, reason: String },
    #[error("{0} takes a single value, not a list")]
    WrongShape(TemplateField),
    #[error("template has no steps")]
    NoSteps,
    #[error("template is invalid: {}", .errors.join("; "))]
    TemplateInvalid { errors: Vec<String> },
    #[error("template is a draft; missing {}", list_names(.missing))]
    NotFinal { missing: Vec<TemplateField> },
}

fn list_names(fields: &[TemplateField]) -> String {
    fields.iter().map(|f| f.name()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateField {
    UniqueId,
    Agent,
    Deadline,
    Action,
    Steps,
    Frequency,
    Materials,
    Result,
    Capabilities,
    CompletionCriteria,
    CompletionInstructions,
    ReportSummary,
    ReportLanguage,
    ReportMedium,
    DeliveryMode,
    StatusOptions,
}

impl TemplateField {
    pub const ALL: [TemplateField; 16] = [
        TemplateField::UniqueId,
        TemplateField::Agent,
        TemplateField::Deadline,
        TemplateField::Action,
        TemplateField::Steps,
        TemplateField::Frequency,
        TemplateField::Materials,
        TemplateField::Result,
        TemplateField::Capabilities,
        TemplateField::CompletionCriteria,
        TemplateField::CompletionInstructions,
        TemplateField::ReportSummary,
        TemplateField::ReportLanguage,
        TemplateField::ReportMedium,
        TemplateField::DeliveryMode,
        TemplateField::StatusOptions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TemplateField::UniqueId => "unique_id",
            TemplateField::Agent => "agent",
            TemplateField::Deadline => "deadline",
            TemplateField::Action => "action",
            TemplateField::Steps => "steps",
            TemplateField::Frequency => "frequency",
            TemplateField::Materials => "materials",
            TemplateField::Result => "result",
            TemplateField::Capabilities => "capabilities",
            TemplateField::CompletionCriteria => "completion_criteria",
            TemplateField::CompletionInstructions => "completion_instructions",
            TemplateField::ReportSummary => "report_summary",
            TemplateField::ReportLanguage => "report_language",
            TemplateField::ReportMedium => "report_medium",
            TemplateField::DeliveryMode => "delivery_mode",
            TemplateField::StatusOptions => "status_options",
        }
    }

    /// Human label, e.g. "Completion criteria".
    pub fn label(self) -> &'static str {
        match self {
            TemplateField::UniqueId => "Unique ID",
            TemplateField::Agent => "Agent",
            TemplateField::Deadline => "Deadline",
            TemplateField::Action => "Action",
            TemplateField::Steps => "Steps",
            TemplateField::Frequency => "Frequency",
            TemplateField::Materials => "Materials",
            TemplateField::Result => "Result",
            TemplateField::Capabilities => "Capabilities",
            TemplateField::CompletionCriteria => "Completion criteria",
            TemplateField::CompletionInstructions => "Completion instructions",
            TemplateField::ReportSummary => "Report summary",
            TemplateField::ReportLanguage => "Report language",
            TemplateField::ReportMedium => "Report medium",
            TemplateField::DeliveryMode => "Delivery mode",
            TemplateField::StatusOptions => "Status options",
        }
    }

    pub fn is_list(self) -> bool {
        matches!(
            self,
            TemplateField::Steps
                | TemplateField::Materials
                | TemplateField::Capabilities
                | TemplateField::CompletionCriteria
                | TemplateField::CompletionInstructions
                | TemplateField::StatusOptions
        )
    }

    /// Lists whose order carries meaning.
    pub fn is_ordered(self) -> bool {
        matches!(self, TemplateField::Steps | TemplateField::CompletionInstructions)
    }
}

impl fmt::Display for TemplateField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Accepts the snake_case name or the label, in any case, with `_`, `-` and
/// spaces treated alike.
impl FromStr for TemplateField {
    type Err = TemplateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = normalize_name(s);
        TemplateField::ALL
            .into_iter()
            .find(|f| normalize_name(f.name()) == key || normalize_name(f.label()) == key)
            .ok_or_else(|| TemplateError::UnknownField(s.to_owned()))
    }
}

pub fn normalize_name(s: &str) -> String {
    s.to_lowercase()
        .replace(['_', '-'], " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// A value to store in a template field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldValue {
    Text(String),
    List(Vec<String>),
}

impl From<&str> for FieldValue {
    fn from(s: &str) -> Self {
        FieldValue::Text(s.to_owned())
    }
}

impl From<String> for FieldValue {
    fn from(s: String) -> Self {
        FieldValue::Text(s)
    }
}

impl From<Vec<String>> for FieldValue {
    fn from(items: Vec<String>) -> Self {
        FieldValue::List(items)
    }
}

impl FieldValue {
    /// Items for a list field. Text is split into lines with bullets and
    /// numbering removed.
    fn into_items(self) -> Vec<String> {
        match self {
            FieldValue::List(items) => items.into_iter().map(|s| s.trim().to_owned()).collect(),
            FieldValue::Text(text) => text
                .lines()
                .map(strip_list_marker)
                .filter(|l| !l.is_empty())
                .map(str::to_owned)
                .collect(),
        }
    }

    fn into_text(self, field: TemplateField) -> Result<String, TemplateError> {
        match self {
            FieldValue::Text(s) => Ok(s.trim().to_owned()),
            FieldValue::List(mut items) if items.len() == 1 => Ok(items.remove(0).trim().to_owned()),
            FieldValue::List(_) => Err(TemplateError::WrongShape(field)),
        }
    }
}

/// The template record. An empty string or list marks an unfilled part.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaskSpecTemplate {
    pub unique_id: String,
    pub agent: String,
    pub deadline: String,
    pub action: String,
    pub steps: Vec<String>,
    pub frequency: String,
    pub materials: Vec<String>,
    pub result: String,
    pub capabilities: Vec<String>,
    pub completion_criteria: Vec<String>,
    pub completion_instructions: Vec<String>,
    pub report_summary: String,
    pub report_language: String,
    pub report_medium: String,
    pub delivery_mode: String,
    pub status_options: Vec<String>,
}

/// Status option as written in a template: trailing full stop allowed
/// ("Completed.").
pub fn parse_status_option(raw: &str) -> Result<TaskStatus, ModelError> {
    let trimmed = raw.trim();
    parse_status(trimmed.strip_suffix('.').unwrap_or(trimmed))
}

impl TaskSpecTemplate {
    fn scalar(&self, field: TemplateField) -> Option<&String> {
        Some(match field {
            TemplateField::UniqueId => &self.unique_id,
            TemplateField::Agent => &self.agent,
            TemplateField::Deadline => &self.deadline,
            TemplateField::Action => &self.action,
            TemplateField::Frequency => &self.frequency,
            TemplateField::Result => &self.result,
            TemplateField::ReportSummary => &self.report_summary,
            TemplateField::ReportLanguage => &self.report_language,
            TemplateField::ReportMedium => &self.report_medium,
            TemplateField::DeliveryMode => &self.delivery_mode,
            _ => return None,
        })
    }

    fn scalar_mut(&mut self, field: TemplateField) -> Option<&mut String> {
        Some(match field {
            TemplateField::UniqueId => &mut self.unique_id,
            TemplateField::Agent => &mut self.agent,
            TemplateField::Deadline => &mut self.deadline,
            TemplateField::Action => &mut self.action,
            TemplateField::Frequency => &mut self.frequency,
            TemplateField::Result => &mut self.result,
            TemplateField::ReportSummary => &mut self.report_summary,
            TemplateField::ReportLanguage => &mut self.report_language,
            TemplateField::ReportMedium => &mut self.report_medium,
            TemplateField::DeliveryMode => &mut self.delivery_mode,
            _ => return None,
        })
    }

    fn list(&self, field: TemplateField) -> Option<&Vec<String>> {
        Some(match field {
            TemplateField::Steps => &self.steps,
            TemplateField::Materials => &self.materials,
            TemplateField::Capabilities => &self.capabilities,
            TemplateField::CompletionCriteria => &self.completion_criteria,
            TemplateField::CompletionInstructions => &self.completion_instructions,
            TemplateField::StatusOptions => &self.status_options,
            _ => return None,
        })
    }

    fn list_mut(&mut self, field: TemplateField) -> Option<&mut Vec<String>> {
        Some(match field {
            TemplateField::Steps => &mut self.steps,
            TemplateField::Materials => &mut self.materials,
            TemplateField::Capabilities => &mut self.capabilities,
            TemplateField::CompletionCriteria => &mut self.completion_criteria,
            TemplateField::CompletionInstructions => &mut self.completion_instructions,
            TemplateField::StatusOptions => &mut self.status_options,
            _ => return None,
        })
    }

    pub fn get(&self, field: TemplateField) -> FieldValue {
        match self.scalar(field) {
            Some(s) => FieldValue::Text(s.clone()),
            None => FieldValue::List(self.list(field).cloned().unwrap_or_default()),
        }
    }

    pub fn is_filled(&self, field: TemplateField) -> bool {
        match self.scalar(field) {
            Some(s) => !s.trim().is_empty(),
            None => self.list(field).is_some_and(|l| l.iter().any(|i| !i.trim().is_empty())),
        }
    }

    /// Stores `value` without any checks. Used by parsers that must keep
    /// whatever they read so validation can report it.
    pub fn set_raw(&mut self, field: TemplateField, value: FieldValue) {
        if let Some(slot) = self.scalar_mut(field) {
            *slot = match value {
                FieldValue::Text(s) => s.trim().to_owned(),
                FieldValue::List(items) => items.join("\n"),
            };
        } else if let Some(slot) = self.list_mut(field) {
            *slot = value.into_items();
        }
    }

    /// Returns a copy with `field` validated and replaced; every other field
    /// is untouched.
    pub fn set_field(
        &self,
        field: TemplateField,
        value: impl Into<FieldValue>,
        lexicon: &Lexicon,
    ) -> Result<TaskSpecTemplate, TemplateError> {
        let value = value.into();
        let mut next = self.clone();
        if field.is_list() {
            let items = value.into_items();
            check_list(field, &items)?;
            *next.list_mut(field).expect("list field") = items;
        } else {
            let text = value.into_text(field)?;
            check_scalar(field, &text, lexicon)?;
            *next.scalar_mut(field).expect("scalar field") = text;
        }
        Ok(next)
    }

    /// Returns a copy with `field` emptied.
    pub fn clear_field(&self, field: TemplateField) -> TaskSpecTemplate {
        let mut next = self.clone();
        if let Some(slot) = next.scalar_mut(field) {
            slot.clear();
        } else if let Some(slot) = next.list_mut(field) {
            slot.clear();
        }
        next
    }

    pub fn typed_unique_id(&self) -> Result<UniqueId, ModelError> {
        validate_unique_id(&self.unique_id)
    }

    /// `Ok(None)` when the deadline is unfilled.
    pub fn typed_deadline(&self) -> Result<Option<Deadline>, ModelError> {
        if self.deadline.trim().is_empty() {
            Ok(None)
        } else {
            parse_deadline(&self.deadline).map(Some)
        }
    }

    pub fn typed_status_options(&self) -> Result<Vec<TaskStatus>, ModelError> {
        self.status_options
            .iter()
            .filter(|s| !s.trim().is_empty())
            .map(|s| parse_status_option(s))
            .collect()
    }

    pub fn completeness(&self) -> FieldCompleteness {
        completeness(self)
    }
}

fn nonempty(field: TemplateField, text: &str) -> Result<(), TemplateError> {
    if text.trim().is_empty() {
        Err(TemplateError::InvalidValue {
            field,
            reason: "value is empty".into(),
        })
    } else {
        Ok(())
    }
}

pub(crate) fn has_leading_verb(text: &str, lexicon: &Lexicon) -> bool {
    analyze_actions(text, lexicon)
        .map(|a| a.candidate_actions.first().is_some_and(|c| c.leading))
        .unwrap_or(false)
}

fn check_scalar(field: TemplateField, text: &str, lexicon: &Lexicon) -> Result<(), TemplateError> {
    let model = |source| TemplateError::FieldValidation { field, source };
    match field {
        TemplateField::UniqueId => validate_unique_id(text).map(|_| ()).map_err(model),
        TemplateField::Deadline => parse_deadline(text).map(|_| ()).map_err(model),
        TemplateField::Action => {
            nonempty(field, text)?;
            if has_leading_verb(text, lexicon) {
                Ok(())
            } else {
                Err(TemplateError::InvalidValue {
                    field,
                    reason: format!("{text:?} does not start with a known action verb"),
                })
            }
        }
        _ => nonempty(field, text),
    }
}

fn check_list(field: TemplateField, items: &[String]) -> Result<(), TemplateError> {
    if items.is_empty() {
        return Err(if field == TemplateField::Steps {
            TemplateError::NoSteps
        } else {
            TemplateError::InvalidValue {
                field,
                reason: "list is empty".into(),
            }
        });
    }
    if let Some(i) = items.iter().position(|s| s.trim().is_empty()) {
        return Err(TemplateError::InvalidValue {
            field,
            reason: format!("item {} is empty", i + 1),
        });
    }
    if field == TemplateField::StatusOptions {
        let mut seen = Vec::new();
        for item in items {
            let status =
                parse_status_option(item).map_err(|source| TemplateError::FieldValidation { field, source })?;
            if seen.contains(&status) {
                return Err(TemplateError::InvalidValue {
                    field,
                    reason: format!("status {status:?} listed twice", status = status.as_str()),
                });
            }
            seen.push(status);
        }
    }
    Ok(())
}

/// Initials of the content words of `text`, upper-cased, plus `-YYYYMMDD`.
/// "Confirm product availability with production managers" on 2024-02-01
/// gives "CPAPM-20240201".
pub fn derive_unique_id(text: &str, date: NaiveDate) -> String {
    let mut initials: String = text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty() && !ID_STOP_WORDS.contains(&w.to_lowercase().as_str()))
        .filter_map(|w| w.chars().next())
        .filter(char::is_ascii_alphanumeric)
        .map(|c| c.to_ascii_uppercase())
        .take(55)
        .collect();
    if initials.is_empty() {
        initials.push('T');
    }
    format!("{initials}-{}", date.format("%Y%m%d"))
}

/// Draft template for `task`: derived unique id, agent "TBD", all four
/// status options, everything else empty.
pub fn skeleton(task: &TaskDescription, date: NaiveDate) -> TaskSpecTemplate {
    TaskSpecTemplate {
        unique_id: derive_unique_id(&task.text, date),
        agent: UNASSIGNED_AGENT.to_owned(),
        status_options: TaskStatus::ALL.iter().map(|s| s.as_str().to_owned()).collect(),
        ..TaskSpecTemplate::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldCompleteness {
    pub filled: Vec<TemplateField>,
    pub missing: Vec<TemplateField>,
    pub ratio: f64,
}

impl FieldCompleteness {
    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }

    /// "filled/16".
    pub fn fraction(&self) -> String {
        format!("{}/{}", self.filled.len(), TemplateField::ALL.len())
    }
}

/// "TBD" counts as a filled agent.
pub fn completeness(template: &TaskSpecTemplate) -> FieldCompleteness {
    let (filled, missing): (Vec<_>, Vec<_>) = TemplateField::ALL.into_iter().partition(|f| template.is_filled(*f));
    let ratio = filled.len() as f64 / TemplateField::ALL.len() as f64;
    FieldCompleteness { filled, missing, ratio }
}
