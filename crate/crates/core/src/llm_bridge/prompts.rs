use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LlmError, PromptKind};

pub const TASK_TEXT_PLACEHOLDER: &str = "{{TASK_TEXT}}";
pub const TASK_LIST_PLACEHOLDER: &str = "{{TASK_LIST}}";

/// A prompt stored as data. Editing the TOML file (and bumping `revision`)
/// changes the prompt without touching code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub kind: PromptKind,
    pub revision: u32,
    pub placeholder: String,
    /// What the placeholder stood for in the original wording.
    pub blank_marker: String,
    pub body: String,
    #[serde(default)]
    pub addendum: String,
}

impl PromptTemplate {
    pub fn parse(text: &str) -> Result<Self, LlmError> {
        let t: PromptTemplate = toml::from_str(text).map_err(|e| LlmError::Template(e.to_string()))?;
        let count = t.body.matches(&t.placeholder).count();
        if count != 1 {
            return Err(LlmError::Template(format!(
                "{} template must contain {} exactly once, found {count}",
                t.kind.as_str(),
                t.placeholder
            )));
        }
        Ok(t)
    }

    pub fn bundled(kind: PromptKind) -> Self {
        let text = match kind {
            PromptKind::Formulation => include_str!("../../templates/formulation.toml"),
            PromptKind::IndexAssessment => include_str!("../../templates/index_assessment.toml"),
            PromptKind::TemplateCompletion => include_str!("../../templates/template_completion.toml"),
        };
        Self::parse(text).expect("bundled prompt template is valid")
    }

    /// The prompt with the placeholder put back to its blank marker.
    pub fn verbatim_text(&self) -> String {
        self.body.replace(&self.placeholder, &self.blank_marker)
    }
}

/// The three prompt templates, bundled or loaded from a directory holding
/// `<kind>.toml` files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptLibrary {
    templates: Vec<PromptTemplate>,
}

impl Default for PromptLibrary {
    fn default() -> Self {
        Self::bundled()
    }
}

impl PromptLibrary {
    pub fn bundled() -> Self {
        PromptLibrary {
            templates: PromptKind::ALL.iter().map(|k| PromptTemplate::bundled(*k)).collect(),
        }
    }

    /// Bundled templates, overridden by any `<kind>.toml` found in `dir`.
    pub fn with_overrides(dir: &Path) -> Result<Self, LlmError> {
        let mut lib = Self::bundled();
        for kind in PromptKind::ALL {
            let path = dir.join(format!("{}.toml", kind.as_str()));
            if !path.exists() {
                continue;
            }
            let text = fs::read_to_string(&path).map_err(|e| LlmError::Template(format!("{}: {e}", path.display())))?;
            let t = PromptTemplate::parse(&text).map_err(|e| LlmError::Template(format!("{}: {e}", path.display())))?;
            if t.kind != kind {
                return Err(LlmError::Template(format!(
                    "{} declares kind {}",
                    path.display(),
                    t.kind.as_str()
                )));
            }
            lib.templates[kind as usize] = t;
        }
        Ok(lib)
    }

    pub fn get(&self, kind: PromptKind) -> &PromptTemplate {
        &self.templates[kind as usize]
    }

    pub fn render_formulation_prompt(&self, task_text: &str, verbatim: bool) -> Result<RenderedPrompt, LlmError> {
        render_single(self.get(PromptKind::Formulation), task_text, verbatim)
    }

    pub fn render_template_prompt(&self, task_text: &str, verbatim: bool) -> Result<RenderedPrompt, LlmError> {
        render_single(self.get(PromptKind::TemplateCompletion), task_text, verbatim)
    }

    /// `tasks` holds (label, description) pairs; each becomes a
    /// "<label>: <description>" line. Use [`numbered_tasks`] for the usual
    /// "Task N" labels.
    pub fn render_index_prompt(&self, tasks: &[(String, String)], verbatim: bool) -> Result<RenderedPrompt, LlmError> {
        if tasks.is_empty() {
            return Err(LlmError::EmptyList);
        }
        if let Some(i) = tasks.iter().position(|(_, d)| d.trim().is_empty()) {
            return Err(LlmError::EmptyTask { index: Some(i) });
        }
        let value = tasks
            .iter()
            .map(|(label, desc)| format!("{}: {}", one_line(label), one_line(desc)))
            .collect::<Vec<_>>()
            .join("\n\n");
        Ok(interpolate(self.get(PromptKind::IndexAssessment), value, verbatim))
    }
}

/// Labels "Task 1", "Task 2", ... in order.
pub fn numbered_tasks<S: AsRef<str>>(descriptions: &[S]) -> Vec<(String, String)> {
    descriptions
        .iter()
        .enumerate()
        .map(|(i, d)| (format!("Task {}", i + 1), d.as_ref().to_owned()))
        .collect()
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn render_single(template: &PromptTemplate, task_text: &str, verbatim: bool) -> Result<RenderedPrompt, LlmError> {
    let value = one_line(task_text);
    if value.is_empty() {
        return Err(LlmError::EmptyTask { index: None });
    }
    Ok(interpolate(template, value, verbatim))
}

fn interpolate(template: &PromptTemplate, value: String, verbatim: bool) -> RenderedPrompt {
    let offset = template
        .body
        .find(&template.placeholder)
        .expect("placeholder checked at parse time");
    let mut text = String::with_capacity(template.body.len() + value.len() + template.addendum.len());
    text.push_str(&template.body[..offset]);
    text.push_str(&value);
    text.push_str(&template.body[offset + template.placeholder.len()..]);
    if !verbatim && !template.addendum.is_empty() {
        text.push('\n');
        text.push_str(&template.addendum);
    }
    RenderedPrompt {
        kind: template.kind,
        revision: template.revision,
        text,
        interpolations: vec![Interpolation {
            offset,
            value,
            blank: template.blank_marker.clone(),
        }],
        verbatim_mode: verbatim,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interpolation {
    /// Byte offset of `value` in the rendered text.
    pub offset: usize,
    pub value: String,
    pub blank: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub kind: PromptKind,
    pub revision: u32,
    pub text: String,
    pub interpolations: Vec<Interpolation>,
    pub verbatim_mode: bool,
}

impl RenderedPrompt {
    /// The text with every inserted value replaced by its blank marker.
    pub fn restore_blanks(&self) -> String {
        let mut out = self.text.clone();
        let mut ordered: Vec<&Interpolation> = self.interpolations.iter().collect();
        ordered.sort_by_key(|i| std::cmp::Reverse(i.offset));
        for i in ordered {
            out.replace_range(i.offset..i.offset + i.value.len(), &i.blank);
        }
        out
    }
}
