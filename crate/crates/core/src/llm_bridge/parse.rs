use serde::{Deserialize, Serialize};

use crate::index::{make_score_sheet, AutomationScoreSheet, Condition};
use crate::spec_template::{normalize_name, FieldValue, TaskSpecTemplate, TemplateField};
use crate::text::{has_list_marker, strip_list_marker};

use super::{LlmError, PromptKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    /// The answer followed the requested layout.
    Exact,
    /// Content was recovered from a looser layout.
    Heuristic,
}

/// A parsed completion. `raw` keeps the full completion text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedResponse<T> {
    pub kind: PromptKind,
    pub payload: T,
    pub confidence: Confidence,
    pub raw: String,
}

/// Minimum number of part names a completion must contain to count as a
/// template draft.
pub const MIN_TEMPLATE_PARTS: usize = 4;

/// Drops markdown emphasis and heading marks around a line.
fn plain(line: &str) -> &str {
    line.trim()
        .trim_start_matches('#')
        .trim()
        .trim_matches(|c| c == '*' || c == '_')
        .trim()
}

fn clean_item(line: &str) -> String {
    let s = strip_list_marker(line);
    let s = s.trim_matches(|c| c == '*' || c == '_').trim();
    s.to_owned()
}

fn is_tasks_heading(line: &str) -> bool {
    let s = plain(line);
    let s = s
        .trim_end_matches(':')
        .trim()
        .trim_matches(|c| c == '*' || c == '_')
        .trim();
    let s = s.trim_matches(|c| c == '"' || c == '“' || c == '”');
    s.eq_ignore_ascii_case("tasks") || s.eq_ignore_ascii_case("final tasks")
}

/// Reads list lines from `lines`, allowing blank lines between items and
/// stopping at the first other line once items have started.
fn leading_items(lines: &[&str]) -> Vec<String> {
    let mut items = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        if has_list_marker(line) {
            let item = clean_item(line);
            if !item.is_empty() {
                items.push(item);
            }
        } else {
            break;
        }
    }
    items
}

/// Units of work from a formulation answer: the items under the last
/// "Tasks" heading, or failing that the trailing list in the answer.
pub fn parse_task_list(completion: &str) -> Result<ParsedResponse<Vec<String>>, LlmError> {
    let lines: Vec<&str> = completion.lines().collect();
    let exact = lines
        .iter()
        .rposition(|l| is_tasks_heading(l))
        .map(|h| leading_items(&lines[h + 1..]))
        .filter(|items| !items.is_empty());
    let (payload, confidence) = match exact {
        Some(items) => (items, Confidence::Exact),
        None => {
            let last = lines
                .iter()
                .rposition(|l| has_list_marker(l))
                .ok_or(LlmError::NoTasksFound)?;
            let mut start = last;
            let mut i = last;
            while i > 0 {
                i -= 1;
                if has_list_marker(lines[i]) {
                    start = i;
                } else if !lines[i].trim().is_empty() {
                    break;
                }
            }
            let items = leading_items(&lines[start..=last]);
            if items.is_empty() {
                return Err(LlmError::NoTasksFound);
            }
            (items, Confidence::Heuristic)
        }
    };
    Ok(ParsedResponse {
        kind: PromptKind::Formulation,
        payload,
        confidence,
        raw: completion.to_owned(),
    })
}

/// One task's scores as read from a model answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreAssessment {
    pub label: String,
    /// Sheet keyed by `label`; total and band are computed locally.
    pub sheet: AutomationScoreSheet,
    /// Total stated by the model, if any.
    pub claimed_total: Option<u8>,
    pub notes: Vec<String>,
}

impl ScoreAssessment {
    /// The sheet re-keyed to a task id, tagged as model-assessed.
    pub fn sheet_for(&self, task_id: &str) -> AutomationScoreSheet {
        let mut sheet = make_score_sheet(task_id, self.sheet.levels()).expect("levels already checked");
        sheet.assessor = Some("llm".into());
        if !self.notes.is_empty() {
            sheet.notes = Some(self.notes.join("; "));
        }
        sheet
    }
}

fn condition_aliases(c: Condition) -> &'static [&'static str] {
    match c {
        Condition::StandardizedInput => &["standardized input", "standardised input"],
        Condition::WellDefinedRules => &["well defined rules", "well-defined rules"],
        Condition::Repetitive => &["repetitive", "repetitiveness"],
        Condition::DataDependent => &["data dependent", "data-dependent", "data dependency"],
        Condition::ObjectiveOutput => &[
            "verifiable or measurable output",
            "verifiable output",
            "measurable output",
            "objective output",
        ],
    }
}

/// Integers in `s`, in order.
fn numbers(s: &str) -> Vec<u32> {
    s.split(|c: char| !c.is_ascii_digit())
        .filter(|t| !t.is_empty() && t.len() <= 3)
        .filter_map(|t| t.parse().ok())
        .collect()
}

/// Byte offset just after `label` in `line` (case-insensitive), when the
/// label is not followed by another digit ("Task 1" does not match
/// "Task 12").
fn find_label(line: &str, label: &str) -> Option<usize> {
    let lower = line.to_ascii_lowercase();
    let needle = label.to_ascii_lowercase();
    let mut from = 0;
    while let Some(pos) = lower[from..].find(&needle) {
        let end = from + pos + needle.len();
        let boundary_before = from + pos == 0
            || !lower[..from + pos]
                .chars()
                .next_back()
                .is_some_and(char::is_alphanumeric);
        let boundary_after = !lower[end..].starts_with(|c: char| c.is_ascii_digit());
        if boundary_before && boundary_after {
            return Some(end);
        }
        from = end;
    }
    None
}

fn after_alias(line: &str, c: Condition) -> Option<String> {
    let lower = line.to_lowercase().replace('-', " ");
    condition_aliases(c).iter().find_map(|alias| {
        let a = alias.replace('-', " ");
        lower.find(&a).map(|p| lower[p + a.len()..].to_owned())
    })
}

fn score_after(rest: &str) -> Option<u32> {
    numbers(rest).first().copied()
}

/// Scores per expected label. The stored total is always the sum of the
/// parsed levels; a different model-stated total is kept as
/// `claimed_total` with a note.
pub fn parse_score_assessments(
    completion: &str,
    labels: &[String],
) -> Result<ParsedResponse<Vec<ScoreAssessment>>, LlmError> {
    if labels.is_empty() {
        return Err(LlmError::EmptyList);
    }
    let lines: Vec<&str> = completion.lines().collect();
    let starts: Vec<usize> = labels
        .iter()
        .map(|label| {
            lines
                .iter()
                .position(|l| find_label(l, label).is_some())
                .ok_or_else(|| LlmError::TaskLabelMissing(label.clone()))
        })
        .collect::<Result<_, _>>()?;

    let mut confidence = Confidence::Exact;
    let mut out = Vec::with_capacity(labels.len());
    for (idx, label) in labels.iter().enumerate() {
        let start = starts[idx];
        let end = starts
            .iter()
            .copied()
            .filter(|&s| s > start)
            .min()
            .unwrap_or(lines.len());
        let section = &lines[start..end];
        let unparseable = |reason: String| LlmError::UnparseableScores {
            label: label.clone(),
            reason,
        };

        let mut levels = [None::<u32>; 5];
        let mut claimed = None;
        for line in section {
            for c in Condition::ALL {
                if levels[c.index()].is_none() {
                    if let Some(rest) = after_alias(line, c) {
                        levels[c.index()] = score_after(&rest);
                    }
                }
            }
            let lower = line.to_lowercase();
            if claimed.is_none() && Condition::ALL.iter().all(|c| after_alias(line, *c).is_none()) {
                if let Some(p) = lower.find("total") {
                    claimed = score_after(&lower[p..]);
                }
            }
        }

        // Table row: "| Task 1 | 3 | 2 | 4 | 1 | 2 | 12 |".
        if levels.iter().all(Option::is_none) {
            let row = lines[start];
            let after = find_label(row, label).expect("label line");
            let nums = numbers(&row[after..]);
            if nums.len() >= 5 {
                for (slot, n) in levels.iter_mut().zip(&nums) {
                    *slot = Some(*n);
                }
                claimed = nums.get(5).copied();
                confidence = Confidence::Heuristic;
            }
        }

        let mut parsed = [0u8; 5];
        for c in Condition::ALL {
            let v = levels[c.index()].ok_or_else(|| unparseable(format!("no score for {}", c.column_label())))?;
            if v > 4 {
                return Err(unparseable(format!("{} scored {v}, outside 0-4", c.column_label())));
            }
            parsed[c.index()] = v as u8;
        }
        let mut sheet = make_score_sheet(label.as_str(), parsed).map_err(|e| unparseable(e.to_string()))?;
        let mut notes = Vec::new();
        let claimed_total = claimed.and_then(|t| u8::try_from(t).ok());
        if let Some(t) = claimed {
            if t != u32::from(sheet.total()) {
                notes.push(format!(
                    "stated total {t} differs from the sum of the condition scores {}; the sum is used",
                    sheet.total()
                ));
            }
        }
        if !notes.is_empty() {
            sheet.notes = Some(notes.join("; "));
        }
        sheet.assessor = Some("llm".into());
        out.push(ScoreAssessment {
            label: label.clone(),
            sheet,
            claimed_total,
            notes,
        });
    }
    Ok(ParsedResponse {
        kind: PromptKind::IndexAssessment,
        payload: out,
        confidence,
        raw: completion.to_owned(),
    })
}

/// Part name at the start of `line` and the text after its colon.
fn part_heading(line: &str) -> Option<(TemplateField, String)> {
    let s = strip_list_marker(line);
    let s = s.trim_start_matches('#').trim();
    let colon = s.find(':')?;
    let name = s[..colon].trim().trim_matches(|c| c == '*' || c == '_').trim();
    if name.is_empty() || name.len() > 40 {
        return None;
    }
    let field = normalize_name(name).parse::<TemplateField>().ok()?;
    let rest = s[colon + 1..].trim().trim_start_matches(['*', '_']).trim();
    Some((field, rest.to_owned()))
}

fn unquote(s: &str) -> &str {
    let s = s.trim();
    for (open, close) in [('"', '"'), ('“', '”'), ('\'', '\'')] {
        if s.len() >= 2 && s.starts_with(open) && s.ends_with(close) {
            return s[open.len_utf8()..s.len() - close.len_utf8()].trim();
        }
    }
    s
}

/// Template draft from a completion that names the parts as "<Part>: ...".
/// Values are stored as read; call `validate` on the result.
pub fn parse_template_draft(completion: &str) -> Result<ParsedResponse<TaskSpecTemplate>, LlmError> {
    let mut parts: Vec<(TemplateField, String, Vec<String>)> = Vec::new();
    for line in completion.lines() {
        if let Some((field, inline)) = part_heading(line) {
            if !parts.iter().any(|(f, _, _)| *f == field) {
                parts.push((field, inline, Vec::new()));
                continue;
            }
        }
        if let Some((_, _, body)) = parts.last_mut() {
            if !line.trim().is_empty() {
                body.push(line.to_owned());
            }
        }
    }
    if parts.len() < MIN_TEMPLATE_PARTS {
        return Err(LlmError::NoPartsFound { found: parts.len() });
    }

    let mut draft = TaskSpecTemplate::default();
    for (field, inline, body) in &parts {
        let value = if field.is_list() {
            let mut items: Vec<String> = body.iter().map(|l| clean_item(l)).filter(|s| !s.is_empty()).collect();
            if items.is_empty() && !inline.is_empty() {
                items = if *field == TemplateField::StatusOptions {
                    inline.split([',', ';']).map(|s| unquote(s).to_owned()).collect()
                } else {
                    vec![unquote(inline).to_owned()]
                };
            }
            FieldValue::List(items)
        } else {
            let mut text = unquote(inline).to_owned();
            if text.is_empty() {
                text = body.iter().map(|l| plain(l)).collect::<Vec<_>>().join(" ");
                text = unquote(&text).to_owned();
            }
            FieldValue::Text(text)
        };
        draft.set_raw(*field, value);
    }
    let confidence = if parts.len() == TemplateField::ALL.len() {
        Confidence::Exact
    } else {
        Confidence::Heuristic
    };
    Ok(ParsedResponse {
        kind: PromptKind::TemplateCompletion,
        payload: draft,
        confidence,
        raw: completion.to_owned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_list_exact_and_heuristic() {
        let text = "Step 1: no.\n\n**Tasks:**\n- Identify trade shows\n- Draft the schedule\n\nLet me know.";
        let p = parse_task_list(text).unwrap();
        assert_eq!(p.payload, vec!["Identify trade shows", "Draft the schedule"]);
        assert_eq!(p.confidence, Confidence::Exact);
        assert_eq!(p.raw, text);

        let text = "Here is the breakdown:\n1. Identify trade shows\n2. Draft the schedule\n";
        let p = parse_task_list(text).unwrap();
        assert_eq!(p.payload, vec!["Identify trade shows", "Draft the schedule"]);
        assert_eq!(p.confidence, Confidence::Heuristic);

        assert_eq!(
            parse_task_list("It already meets all criteria."),
            Err(LlmError::NoTasksFound)
        );
    }

    #[test]
    fn last_tasks_heading_wins() {
        let text = "Tasks\n- a draft\n\nRevised.\n\nTasks\n- Book venues\n- Ship booth";
        assert_eq!(
            parse_task_list(text).unwrap().payload,
            vec!["Book venues", "Ship booth"]
        );
    }

    #[test]
    fn labels_do_not_match_longer_numbers() {
        assert_eq!(find_label("Task 12: x", "Task 1"), None);
        assert_eq!(find_label("**Task 1**: x", "Task 1"), Some(8));
        assert_eq!(find_label("Subtask 1", "Task 1"), None);
    }

    fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("Task {i}")).collect()
    }

    #[test]
    fn scores_with_matching_total() {
        let text = "Task 1: Draft the schedule\nStandardized input: 3\nWell-defined rules: 3\nRepetitive: 2\nData-dependent: 3\nVerifiable or measurable output: 3\nTotal: 14\n";
        let p = parse_score_assessments(text, &labels(1)).unwrap();
        let a = &p.payload[0];
        assert_eq!(a.sheet.levels(), [3, 3, 2, 3, 3]);
        assert_eq!(a.sheet.total(), 14);
        assert_eq!(a.claimed_total, Some(14));
        assert!(a.notes.is_empty());
        assert_eq!(p.confidence, Confidence::Exact);
    }

    #[test]
    fn local_sum_overrides_stated_total() {
        let text = "Task 1\n- Standardized input: 3\n- Well-defined rules: 3\n- Repetitive: 2\n- Data-dependent: 3\n- Verifiable or measurable output: 3\n- Total score: 15\n";
        let a = &parse_score_assessments(text, &labels(1)).unwrap().payload[0];
        assert_eq!(a.sheet.total(), 14);
        assert_eq!(a.claimed_total, Some(15));
        assert_eq!(a.notes.len(), 1);
        assert!(a.notes[0].contains("15") && a.notes[0].contains("14"));
        let s = a.sheet_for("T9");
        assert_eq!(
            (s.task_id.as_str(), s.total(), s.assessor.as_deref()),
            ("T9", 14, Some("llm"))
        );
    }

    #[test]
    fn missing_label_and_bad_scores() {
        let text = "Task 1\nStandardized input: 3\nWell-defined rules: 3\nRepetitive: 2\nData-dependent: 3\nVerifiable or measurable output: 3\n";
        assert_eq!(
            parse_score_assessments(text, &labels(2)),
            Err(LlmError::TaskLabelMissing("Task 2".into()))
        );
        let text = text.replace("Repetitive: 2", "Repetitive: 7");
        assert!(matches!(
            parse_score_assessments(&text, &labels(1)),
            Err(LlmError::UnparseableScores { .. })
        ));
        let text = "Task 1\nStandardized input: 3\n";
        assert!(matches!(
            parse_score_assessments(text, &labels(1)),
            Err(LlmError::UnparseableScores { .. })
        ));
    }

    #[test]
    fn table_rows_are_heuristic() {
        let text = "| Task | SI | WR | R | DD | VO | Total |\n|---|---|---|---|---|---|---|\n| Task 1 | 3 | 2 | 4 | 1 | 2 | 12 |\n| Task 2 | 4 | 4 | 4 | 4 | 4 | 19 |\n";
        let p = parse_score_assessments(text, &labels(2)).unwrap();
        assert_eq!(p.confidence, Confidence::Heuristic);
        assert_eq!(p.payload[0].sheet.total(), 12);
        assert_eq!(p.payload[1].sheet.total(), 20);
        assert_eq!(p.payload[1].notes.len(), 1);
    }

    #[test]
    fn template_draft_binds_parts() {
        let text = "Sure.\n\n**Unique ID:** CPA-20240201\nAgent: TBD\nDeadline: 02/30/2024\nAction: Confirm product availability\nSteps:\n1. Identify product\n2. Contact managers\nStatus Options: Completed, In progress\n";
        let p = parse_template_draft(text).unwrap();
        let t = &p.payload;
        assert_eq!(t.unique_id, "CPA-20240201");
        assert_eq!(t.deadline, "02/30/2024");
        assert_eq!(t.steps, vec!["Identify product", "Contact managers"]);
        assert_eq!(t.status_options, vec!["Completed", "In progress"]);
        assert_eq!(p.confidence, Confidence::Heuristic);
        assert_eq!(t.completeness().filled.len(), 6);
        assert_eq!(
            parse_template_draft("The weather is nice: sunny."),
            Err(LlmError::NoPartsFound { found: 0 })
        );
    }
}
