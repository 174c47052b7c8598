use std::fmt::Write as _;

use chrono::{NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::formulation::Lexicon;
use crate::index::{AutomationScoreSheet, InterpretationBand};
use crate::model::Severity;

use super::{FieldValue, TaskSpecTemplate, TemplateError, TemplateField};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChecklistEntry {
    pub field: TemplateField,
    pub filled: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub task_id: String,
    pub total: u8,
    pub band: InterpretationBand,
}

/// Checklist and narrative used when selecting or adapting a tool for a
/// specified task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AIReadinessReport {
    pub template_id: String,
    pub checklist: Vec<ChecklistEntry>,
    pub score: Option<ScoreSummary>,
    pub narrative: String,
}

impl AIReadinessReport {
    pub fn score_sheet_ref(&self) -> Option<&str> {
        self.score.as_ref().map(|s| s.task_id.as_str())
    }

    pub fn filled_count(&self) -> usize {
        self.checklist.iter().filter(|e| e.filled).count()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReadinessOptions {
    /// Accept templates with unfilled parts.
    pub allow_draft: bool,
    /// Date used for deadline checks; today (UTC) when `None`.
    pub as_of: Option<NaiveDate>,
}

/// Builds the readiness checklist. Fails on templates with validation
/// errors, and on drafts unless `allow_draft` is set.
pub fn readiness_report(
    template: &TaskSpecTemplate,
    sheet: Option<&AutomationScoreSheet>,
    lexicon: &Lexicon,
    options: ReadinessOptions,
) -> Result<AIReadinessReport, TemplateError> {
    let today = options.as_of.unwrap_or_else(|| Utc::now().date_naive());
    let report = template.validate_as_of(lexicon, today);
    if !report.ok() {
        return Err(TemplateError::TemplateInvalid {
            errors: report.errors().map(|f| format!("{}: {}", f.field, f.message)).collect(),
        });
    }
    let completeness = template.completeness();
    if !options.allow_draft && !completeness.is_complete() {
        return Err(TemplateError::NotFinal {
            missing: completeness.missing,
        });
    }

    let checklist = TemplateField::ALL
        .into_iter()
        .map(|field| ChecklistEntry {
            field,
            filled: template.is_filled(field),
            notes: report
                .findings()
                .iter()
                .filter(|f| f.field == field.name() && f.severity == Severity::Warning)
                .filter(|f| f.message != "not filled")
                .map(|f| f.message.clone())
                .collect(),
        })
        .collect::<Vec<_>>();
    let score = sheet.map(|s| ScoreSummary {
        task_id: s.task_id.clone(),
        total: s.total(),
        band: s.band(),
    });
    let narrative = narrative(template, &checklist, score.as_ref());
    Ok(AIReadinessReport {
        template_id: template.unique_id.clone(),
        checklist,
        score,
        narrative,
    })
}

fn value_text(template: &TaskSpecTemplate, field: TemplateField) -> String {
    if !template.is_filled(field) {
        return "(not specified)".into();
    }
    match template.get(field) {
        FieldValue::Text(s) => s,
        FieldValue::List(items) if field.is_ordered() => items
            .iter()
            .enumerate()
            .map(|(i, s)| format!("\n  {}. {s}", i + 1))
            .collect(),
        FieldValue::List(items) => items.iter().map(|s| format!("\n  - {s}")).collect(),
    }
}

fn narrative(template: &TaskSpecTemplate, checklist: &[ChecklistEntry], score: Option<&ScoreSummary>) -> String {
    let mut out = String::new();
    let filled = checklist.iter().filter(|e| e.filled).count();
    let _ = writeln!(out, "Task specification {}", template.unique_id);
    let _ = writeln!(out, "Parts filled: {filled}/{}", checklist.len());
    for field in TemplateField::ALL {
        let _ = writeln!(out, "{}: {}", field.label(), value_text(template, field));
    }
    if let Some(s) = score {
        let _ = writeln!(
            out,
            "Automation index: {}/20, {} ({})",
            s.total,
            s.band.label(),
            serde_json::to_value(s.band)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default()
        );
    }
    let open: Vec<String> = checklist
        .iter()
        .flat_map(|e| e.notes.iter().map(move |n| format!("{}: {n}", e.field.label())))
        .collect();
    if !open.is_empty() {
        let _ = writeln!(out, "Review notes:");
        for n in open {
            let _ = writeln!(out, "  - {n}");
        }
    }
    out
}
