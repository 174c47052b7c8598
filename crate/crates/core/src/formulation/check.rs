use crate::model::TaskDescription;

use super::analyze::{analyze_actions, ActionAnalysis};
use super::{CriterionResult, FormulationDiagnostics, FormulationError, Lexicon};

/// Phrasings that present the work as performed jointly by several parties.
const JOINT_PERFORMER: &[&[&str]] = &[
    &["jointly"],
    &["together", "with"],
    &["in", "collaboration", "with"],
    &["in", "partnership", "with"],
    &["in", "conjunction", "with"],
    &["collaboratively"],
    &["as", "a", "team"],
    &["along", "with"],
    &["co-lead"],
    &["co-author"],
    &["co-host"],
];

/// Collaborator mentions that only describe consultation.
const CONSULTATION: &[&[&str]] = &[
    &["working", "with"],
    &["with"],
    &["in", "consultation", "with"],
    &["consulting"],
];

fn words_lower(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '-'))
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn contains_phrase(words: &[String], phrase: &[&str]) -> bool {
    words
        .windows(phrase.len())
        .any(|w| w.iter().zip(phrase).all(|(a, b)| a == b))
}

fn judge_agent(words: &[String], analysis: &ActionAnalysis, notes: &mut Vec<String>) -> CriterionResult {
    if let Some(phrase) = JOINT_PERFORMER.iter().find(|p| contains_phrase(words, p)) {
        notes.push(format!(
            "single agent: \"{}\" presents the work as jointly performed",
            phrase.join(" ")
        ));
        return CriterionResult::Fail;
    }
    let imperative = analysis.candidate_actions.first().is_some_and(|c| c.leading);
    if !imperative {
        notes.push("single agent: no imperative action, executing party undetermined".into());
        return CriterionResult::Unknown;
    }
    if let Some(phrase) = CONSULTATION.iter().find(|p| contains_phrase(words, p)) {
        notes.push(format!(
            "single agent: \"{}\" read as consultation, which is allowed",
            phrase.join(" ")
        ));
    }
    CriterionResult::Pass
}

fn judge_action(analysis: &ActionAnalysis, notes: &mut Vec<String>) -> CriterionResult {
    let actions = analysis.action_tokens();
    match actions.len() {
        0 => {
            notes.push("single action: no lexicon verb in leading position".into());
            CriterionResult::Unknown
        }
        1 => CriterionResult::Pass,
        _ if !analysis.coordinations.is_empty() => {
            let pairs: Vec<String> = analysis
                .coordinations
                .iter()
                .map(|c| format!("\"{}\" {} \"{}\"", actions[c.left], c.joiner.as_str(), actions[c.right]))
                .collect();
            notes.push(format!("single action: coordinated verbs {}", pairs.join(", ")));
            CriterionResult::Fail
        }
        _ => {
            notes.push(format!(
                "single action: several clause-initial verbs ({})",
                actions.join(", ")
            ));
            CriterionResult::Unknown
        }
    }
}

fn judge_outcome(analysis: &ActionAnalysis, notes: &mut Vec<String>) -> CriterionResult {
    let markers = &analysis.outcome_markers;
    match (markers.len(), analysis.outcome_joiner) {
        (0, _) => {
            notes.push("single outcome: no outcome noun phrase detected".into());
            CriterionResult::Unknown
        }
        (1, _) | (_, None) => CriterionResult::Pass,
        (_, Some(joiner)) => {
            let phrases: Vec<&str> = markers.iter().map(|m| m.phrase.as_str()).collect();
            // "budget and deadline adherence": single-word modifiers sharing
            // the head of the last conjunct name separate results.
            let (last, rest) = markers.split_last().expect("len > 1");
            let shared_head = rest.iter().all(|m| m.words == 1) && last.words >= 2;
            if joiner.is_conjunctive() && shared_head {
                notes.push(format!(
                    "single outcome: \"{}\" joins separate results sharing one head noun",
                    phrases.join(&format!(" {} ", joiner.as_str()))
                ));
                CriterionResult::Fail
            } else if joiner.is_conjunctive() {
                notes.push(format!(
                    "single outcome: conjoined objects ({}) may be one compound result",
                    phrases.join(" / ")
                ));
                CriterionResult::Unknown
            } else {
                notes.push(format!("single outcome: alternative objects ({})", phrases.join(" / ")));
                CriterionResult::Unknown
            }
        }
    }
}

/// Judges one description against the three basic-unit-of-work criteria.
pub fn check_unit_of_work(
    task: &TaskDescription,
    lexicon: &Lexicon,
) -> Result<FormulationDiagnostics, FormulationError> {
    let analysis = analyze_actions(&task.text, lexicon)?;
    let words = words_lower(&task.text);
    let mut notes = Vec::new();
    let agent = judge_agent(&words, &analysis, &mut notes);
    let action = judge_action(&analysis, &mut notes);
    let outcome = judge_outcome(&analysis, &mut notes);
    Ok(FormulationDiagnostics::new(
        task.id.clone(),
        [agent, action, outcome],
        Some(analysis),
        notes,
    ))
}

/// Checks every task in order. A task that cannot be analysed gets a failing
/// entry with a note instead of aborting the batch.
pub fn batch_check(tasks: &[TaskDescription], lexicon: &Lexicon) -> Vec<FormulationDiagnostics> {
    tasks
        .iter()
        .map(|task| {
            check_unit_of_work(task, lexicon).unwrap_or_else(|e| {
                let note = match e {
                    FormulationError::EmptyText => "empty text".to_owned(),
                    other => other.to_string(),
                };
                FormulationDiagnostics::rejected(task.id.clone(), note)
            })
        })
        .collect()
}
