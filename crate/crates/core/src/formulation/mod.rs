//! Basic-unit-of-work checks and decomposition records.
//!
//! A task description is a basic unit of work when it can be completed by a
//! single agent, names a single action, and produces a single identifiable
//! outcome. Each criterion is judged from the text alone and may come back
//! `Unknown`; the checker never turns an undecided criterion into a pass.

mod analyze;
mod check;
mod decompose;
mod lexicon;

pub use analyze::{analyze_actions, ActionAnalysis, CandidateAction, Coordination, Joiner, OutcomeMarker};
pub use check::{batch_check, check_unit_of_work};
pub use decompose::{register_decomposition, DecompositionRecord};
pub use lexicon::Lexicon;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulationError {
    #[error("task text is empty")]
    EmptyText,
    #[error("decomposition has no children")]
    EmptyChildren,
    #[error("child {index} has empty text")]
    EmptyChildText { index: usize },
    #[error("duplicate child text {0:?}")]
    DuplicateChild(String),
    #[error("invalid task: {0}")]
    InvalidTask(#[from] crate::model::ModelError),
    #[error("cannot read lexicon {path}: {reason}")]
    Lexicon { path: String, reason: String },
    #[error("verdict {verdict} is inconsistent with criteria {criteria:?}")]
    InconsistentVerdict {
        verdict: Verdict,
        criteria: [CriterionResult; 3],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriterionResult {
    Pass,
    Fail,
    Unknown,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CriterionResult::Pass => "pass",
            CriterionResult::Fail => "fail",
            CriterionResult::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NeedsReview,
}

impl Verdict {
    /// Any failure fails; otherwise any unknown needs review.
    pub fn from_criteria(criteria: &[CriterionResult]) -> Verdict {
        if criteria.contains(&CriterionResult::Fail) {
            Verdict::Fail
        } else if criteria.contains(&CriterionResult::Unknown) {
            Verdict::NeedsReview
        } else {
            Verdict::Pass
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NeedsReview => "needs_review",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    SingleAgent,
    SingleAction,
    SingleOutcome,
}

/// Per-criterion results for one task. The verdict is derived from the
/// criteria and cannot disagree with them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDiagnostics")]
pub struct FormulationDiagnostics {
    pub task_id: String,
    verdict: Verdict,
    criterion_single_agent: CriterionResult,
    criterion_single_action: CriterionResult,
    criterion_single_outcome: CriterionResult,
    pub evidence: Option<ActionAnalysis>,
    pub notes: Vec<String>,
}

#[derive(Deserialize)]
struct RawDiagnostics {
    task_id: String,
    verdict: Verdict,
    criterion_single_agent: CriterionResult,
    criterion_single_action: CriterionResult,
    criterion_single_outcome: CriterionResult,
    evidence: Option<ActionAnalysis>,
    #[serde(default)]
    notes: Vec<String>,
}

impl TryFrom<RawDiagnostics> for FormulationDiagnostics {
    type Error = FormulationError;

    fn try_from(raw: RawDiagnostics) -> Result<Self, Self::Error> {
        FormulationDiagnostics::with_verdict(
            raw.task_id,
            raw.verdict,
            [
                raw.criterion_single_agent,
                raw.criterion_single_action,
                raw.criterion_single_outcome,
            ],
            raw.evidence,
            raw.notes,
        )
    }
}

impl FormulationDiagnostics {
    /// Criteria are given in the order agent, action, outcome.
    pub fn new(
        task_id: impl Into<String>,
        criteria: [CriterionResult; 3],
        evidence: Option<ActionAnalysis>,
        notes: Vec<String>,
    ) -> Self {
        FormulationDiagnostics {
            task_id: task_id.into(),
            verdict: Verdict::from_criteria(&criteria),
            criterion_single_agent: criteria[0],
            criterion_single_action: criteria[1],
            criterion_single_outcome: criteria[2],
            evidence,
            notes,
        }
    }

    /// Like [`FormulationDiagnostics::new`] but with a caller-stated verdict,
    /// which must agree with the criteria.
    pub fn with_verdict(
        task_id: impl Into<String>,
        verdict: Verdict,
        criteria: [CriterionResult; 3],
        evidence: Option<ActionAnalysis>,
        notes: Vec<String>,
    ) -> Result<Self, FormulationError> {
        if Verdict::from_criteria(&criteria) != verdict {
            return Err(FormulationError::InconsistentVerdict { verdict, criteria });
        }
        Ok(Self::new(task_id, criteria, evidence, notes))
    }

    /// Diagnostics for text that could not be analysed at all.
    pub fn rejected(task_id: impl Into<String>, note: impl Into<String>) -> Self {
        Self::new(task_id, [CriterionResult::Fail; 3], None, vec![note.into()])
    }

    pub fn verdict(&self) -> Verdict {
        self.verdict
    }

    pub fn single_agent(&self) -> CriterionResult {
        self.criterion_single_agent
    }

    pub fn single_action(&self) -> CriterionResult {
        self.criterion_single_action
    }

    pub fn single_outcome(&self) -> CriterionResult {
        self.criterion_single_outcome
    }

    pub fn criteria(&self) -> [CriterionResult; 3] {
        [
            self.criterion_single_agent,
            self.criterion_single_action,
            self.criterion_single_outcome,
        ]
    }

    /// Overrides one criterion and recomputes the verdict.
    pub fn set_criterion(&mut self, criterion: Criterion, result: CriterionResult, note: impl Into<String>) {
        match criterion {
            Criterion::SingleAgent => self.criterion_single_agent = result,
            Criterion::SingleAction => self.criterion_single_action = result,
            Criterion::SingleOutcome => self.criterion_single_outcome = result,
        }
        self.verdict = Verdict::from_criteria(&self.criteria());
        self.notes.push(note.into());
    }

    pub fn candidate_action_count(&self) -> usize {
        self.evidence.as_ref().map_or(0, |e| e.candidate_actions.len())
    }
}
