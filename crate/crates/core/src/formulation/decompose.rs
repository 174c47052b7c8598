use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::model::{Source, TaskDescription};

use super::check::check_unit_of_work;
use super::{analyze_actions, Criterion, CriterionResult, FormulationDiagnostics, FormulationError, Lexicon, Verdict};

/// A parent description split into child units of work, with one set of
/// diagnostics per child.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionRecord {
    pub parent_id: String,
    pub children: Vec<TaskDescription>,
    pub child_diagnostics: Vec<FormulationDiagnostics>,
    pub accepted: bool,
}

impl DecompositionRecord {
    /// True when no child failed; recomputed from the diagnostics.
    pub fn compute_accepted(&self) -> bool {
        self.child_diagnostics.iter().all(|d| d.verdict() != Verdict::Fail)
    }
}

/// Child ids are `<parent>.<n>`, numbered from 1 in the given order.
pub fn child_id(parent_id: &str, index: usize) -> String {
    format!("{parent_id}.{}", index + 1)
}

/// Records a split of `parent` into `child_texts` and checks each child.
///
/// Children are supplied by a person or a model; this function only
/// validates them. A child that names more candidate actions than its parent
/// is marked as failing the single-action criterion.
pub fn register_decomposition(
    parent: &TaskDescription,
    child_texts: &[String],
    lexicon: &Lexicon,
) -> Result<DecompositionRecord, FormulationError> {
    if child_texts.is_empty() {
        return Err(FormulationError::EmptyChildren);
    }
    let mut seen = HashSet::new();
    for (index, text) in child_texts.iter().enumerate() {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(FormulationError::EmptyChildText { index });
        }
        if !seen.insert(trimmed) {
            return Err(FormulationError::DuplicateChild(trimmed.to_owned()));
        }
    }

    let parent_actions = analyze_actions(&parent.text, lexicon)?.candidate_actions.len();
    let mut children = Vec::with_capacity(child_texts.len());
    let mut child_diagnostics = Vec::with_capacity(child_texts.len());
    for (index, text) in child_texts.iter().enumerate() {
        let child = TaskDescription::new(child_id(&parent.id, index), text.trim(), Source::DecompositionChild)?
            .with_parent(parent.id.clone())?;
        let mut diag = check_unit_of_work(&child, lexicon)?;
        let child_actions = diag.candidate_action_count();
        if child_actions > parent_actions {
            diag.set_criterion(
                Criterion::SingleAction,
                CriterionResult::Fail,
                format!("single action: child names {child_actions} candidate actions, parent only {parent_actions}"),
            );
        }
        children.push(child);
        child_diagnostics.push(diag);
    }
    let mut record = DecompositionRecord {
        parent_id: parent.id.clone(),
        children,
        child_diagnostics,
        accepted: false,
    };
    record.accepted = record.compute_accepted();
    Ok(record)
}
