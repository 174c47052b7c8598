use chrono::{NaiveDate, Utc};

use crate::formulation::{check_unit_of_work, FormulationDiagnostics, Lexicon, Verdict};
use crate::model::{Source, TaskDescription, ValidationReport};
use crate::text::without_parentheticals;

use super::{has_leading_verb, parse_status_option, TaskSpecTemplate, TemplateError, TemplateField};

/// Runs the unit-of-work check on every step. The results are advice; a
/// multi-verb step does not make the template invalid.
pub fn check_steps(
    template: &TaskSpecTemplate,
    lexicon: &Lexicon,
) -> Result<Vec<(usize, FormulationDiagnostics)>, TemplateError> {
    if template.steps.is_empty() {
        return Err(TemplateError::NoSteps);
    }
    Ok(template
        .steps
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.trim().is_empty())
        .filter_map(|(i, step)| {
            let task = TaskDescription::new(format!("step-{}", i + 1), step.as_str(), Source::Manual).ok()?;
            check_unit_of_work(&task, lexicon).ok().map(|d| (i, d))
        })
        .collect())
}

fn coordinated(result: &str) -> bool {
    let plain = without_parentheticals(result);
    plain.contains('/')
        || plain
            .split(|c: char| !c.is_alphanumeric())
            .any(|w| w.eq_ignore_ascii_case("and") || w.eq_ignore_ascii_case("or"))
}

impl TaskSpecTemplate {
    /// Validates against today's date (UTC).
    pub fn validate(&self, lexicon: &Lexicon) -> ValidationReport {
        self.validate_as_of(lexicon, Utc::now().date_naive())
    }

    /// Invalid values are errors. Unfilled parts, past deadlines, steps that
    /// are not single units of work and coordinated results are warnings.
    pub fn validate_as_of(&self, lexicon: &Lexicon, today: NaiveDate) -> ValidationReport {
        let mut report = ValidationReport::new(self.unique_id.clone());
        for field in TemplateField::ALL {
            if !self.is_filled(field) {
                report.warning(field.name(), "not filled");
            }
        }

        if self.is_filled(TemplateField::UniqueId) {
            if let Err(e) = self.typed_unique_id() {
                report.error(TemplateField::UniqueId.name(), e.to_string());
            }
        }
        match self.typed_deadline() {
            Err(e) => report.error(TemplateField::Deadline.name(), e.to_string()),
            Ok(Some(d)) if d.date() < today => {
                report.warning(TemplateField::Deadline.name(), format!("{} is in the past", d.render()))
            }
            Ok(_) => {}
        }
        if self.is_filled(TemplateField::Action) && !has_leading_verb(&self.action, lexicon) {
            report.error(
                TemplateField::Action.name(),
                format!("{:?} does not start with a known action verb", self.action),
            );
        }

        for field in TemplateField::ALL.into_iter().filter(|f| f.is_list()) {
            let items = self.list(field).expect("list field");
            let has_content = items.iter().any(|s| !s.trim().is_empty());
            if has_content {
                if let Some(i) = items.iter().position(|s| s.trim().is_empty()) {
                    report.error(field.name(), format!("item {} is empty", i + 1));
                }
            }
        }

        let mut seen = Vec::new();
        for raw in self.status_options.iter().filter(|s| !s.trim().is_empty()) {
            match parse_status_option(raw) {
                Ok(s) if seen.contains(&s) => report.error(
                    TemplateField::StatusOptions.name(),
                    format!("status {:?} listed twice", s.as_str()),
                ),
                Ok(s) => seen.push(s),
                Err(e) => report.error(TemplateField::StatusOptions.name(), e.to_string()),
            }
        }

        if self.is_filled(TemplateField::Result) && coordinated(&self.result) {
            report.warning(
                TemplateField::Result.name(),
                "result joins several nouns; expected a single noun with descriptors",
            );
        }

        if let Ok(steps) = check_steps(self, lexicon) {
            for (i, diag) in steps {
                if diag.verdict() != Verdict::Pass {
                    let detail = diag.notes.join("; ");
                    report.warning(
                        TemplateField::Steps.name(),
                        format!(
                            "step {} is not a single unit of work ({}): {detail}",
                            i + 1,
                            verdict_name(diag.verdict())
                        ),
                    );
                }
            }
        }
        report
    }

    /// Final means valid and all 16 parts filled.
    pub fn is_final(&self, lexicon: &Lexicon) -> bool {
        self.completeness().is_complete() && self.validate(lexicon).ok()
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::NeedsReview => "needs review",
    }
}
