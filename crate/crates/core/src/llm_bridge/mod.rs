//! Prompt rendering, a generic completion client, and parsers that turn
//! model answers back into task lists, score sheets and template drafts.

mod client;
mod parse;
mod prompts;

pub use client::{extract_text, submit, CompletionConfig, ENV_ENDPOINT, ENV_TIMEOUT, ENV_TOKEN_VAR};
pub use parse::{
    parse_score_assessments, parse_task_list, parse_template_draft, Confidence, ParsedResponse, ScoreAssessment,
    MIN_TEMPLATE_PARTS,
};
pub use prompts::{
    numbered_tasks, Interpolation, PromptLibrary, PromptTemplate, RenderedPrompt, TASK_LIST_PLACEHOLDER,
    TASK_TEXT_PLACEHOLDER,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LlmError {
    #[error("task text is empty{}", .index.map(|i| format!(" (task {})", i + 1)).unwrap_or_default())]
    EmptyTask { index: Option<usize> },
    #[error("task list is empty")]
    EmptyList,
    #[error("prompt template: {0}")]
    Template(String),
    #[error("completion config: {0}")]
    Config(String),
    #[error("credential variable {0} is not set")]
    MissingCredentials(String),
    #[error("request timed out after {0} s")]
    Timeout(u64),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("endpoint answered with status {0}")]
    NonSuccessStatus(u16),
    #[error("could not extract completion text: {0}")]
    Extraction(String),
    #[error("no task list found in the completion")]
    NoTasksFound,
    #[error("{0} not found in the completion")]
    TaskLabelMissing(String),
    #[error("scores for {label} could not be read: {reason}")]
    UnparseableScores { label: String, reason: String },
    #[error("only {found} template part names found (need at least {MIN_TEMPLATE_PARTS})")]
    NoPartsFound { found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    Formulation,
    IndexAssessment,
    TemplateCompletion,
}

impl PromptKind {
    pub const ALL: [PromptKind; 3] = [
        PromptKind::Formulation,
        PromptKind::IndexAssessment,
        PromptKind::TemplateCompletion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PromptKind::Formulation => "formulation",
            PromptKind::IndexAssessment => "index_assessment",
            PromptKind::TemplateCompletion => "template_completion",
        }
    }
}

impl fmt::Display for PromptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PromptKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().replace('-', "_").as_str() {
            "formulation" => Ok(PromptKind::Formulation),
            "index_assessment" | "index" => Ok(PromptKind::IndexAssessment),
            "template_completion" | "template" => Ok(PromptKind::TemplateCompletion),
            other => Err(format!("unknown prompt kind {other:?}")),
        }
    }
}
