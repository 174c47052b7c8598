//! The `cm` command line: argument definitions and dispatch.

mod commands;

use std::fmt;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::{Args, ColorChoice, CommandFactory, Parser, Subcommand};

use crate::report::OutputFormat;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cm", version, color = ColorChoice::Never, about = "Task formulation, automation scoring and task specification tooling")]
pub struct Cli {
    /// Registry directory.
    #[arg(long, global = true, default_value = "cm-registry")]
    pub registry: PathBuf,
    /// Verb lexicon file (one verb or verb phrase per line).
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    /// Table format: markdown, csv or plain.
    #[arg(long, global = true, default_value = "markdown", value_parser = parse_format)]
    pub format: OutputFormat,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse()
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check descriptions against the unit-of-work criteria and record splits.
    #[command(subcommand)]
    Formulate(FormulateCmd),
    /// Score tasks on the automation index and rank them.
    #[command(subcommand)]
    Index(IndexCmd),
    /// Create, edit, validate and report on task specification templates.
    #[command(subcommand)]
    Spec(SpecCmd),
    /// Render one of the bundled prompts.
    #[command(subcommand)]
    Prompt(PromptCmd),
    /// Send a prompt to a completion endpoint, or parse a saved answer.
    #[command(subcommand)]
    Llm(LlmCmd),
    /// Read task descriptions into the registry.
    #[command(subcommand)]
    Ingest(IngestCmd),
    /// Load or rewrite the registry.
    #[command(subcommand)]
    Registry(RegistryCmd),
}

#[derive(Debug, Subcommand)]
pub enum FormulateCmd {
    /// Check one description or stored tasks.
    Check {
        /// Check this text instead of stored tasks.
        #[arg(long, conflicts_with_all = ["task_id", "all", "record"])]
        text: Option<String>,
        /// Stored task to check (repeatable).
        #[arg(long = "task-id")]
        task_id: Vec<String>,
        /// Check every stored task.
        #[arg(long, conflicts_with = "task_id")]
        all: bool,
        /// Store the diagnostics in the registry.
        #[arg(long)]
        record: bool,
    },
    /// Record a split of a stored task into child units and check each child.
    Decompose {
        #[arg(long = "task-id")]
        task_id: String,
        /// Child description (repeatable, in order).
        #[arg(long = "child", required_unless_present = "children_file")]
        children: Vec<String>,
        /// File with one child per line ("-" for stdin).
        #[arg(long = "children-file", conflicts_with = "children")]
        children_file: Option<PathBuf>,
        /// Check without storing.
        #[arg(long = "dry-run")]
        dry_run: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum IndexCmd {
    /// Score one task from five levels or interactively.
    Score {
        #[arg(long = "task-id")]
        task_id: Option<String>,
        /// Five comma-separated levels in condition order.
        #[arg(
            long,
            value_delimiter = ',',
            num_args = 1,
            required_unless_present = "interactive",
            conflicts_with = "interactive"
        )]
        levels: Vec<u8>,
        /// Ask for each condition level on stdin.
        #[arg(long)]
        interactive: bool,
        /// Store the sheet in the registry.
        #[arg(long, requires = "task_id")]
        record: bool,
        #[arg(long)]
        assessor: Option<String>,
        #[arg(long)]
        notes: Option<String>,
    },
    /// Rank stored tasks by total score.
    Rank {
        /// Restrict to these tasks (repeatable).
        #[arg(long = "task-id")]
        task_id: Vec<String>,
    },
    /// Print the level statements for every condition.
    Statements,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct TemplateSource {
    /// Stored template unique ID.
    #[arg(long)]
    pub id: Option<String>,
    /// Template JSON file.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SpecCmd {
    /// Store a new template: a skeleton for a stored task, or a JSON file.
    New {
        #[arg(long = "task-id", required_unless_present = "file", conflicts_with = "file")]
        task_id: Option<String>,
        #[arg(long)]
        file: Option<PathBuf>,
        /// Date used for the derived unique ID (YYYY-MM-DD); today by default.
        #[arg(long)]
        date: Option<chrono::NaiveDate>,
        /// Replace an existing template with the same unique ID.
        #[arg(long)]
        force: bool,
    },
    /// Set one part of a stored template.
    Set {
        #[arg(long)]
        id: String,
        /// Part name, e.g. deadline or "Completion criteria".
        #[arg(long)]
        field: String,
        /// Value; repeat for list parts.
        #[arg(long, required = true)]
        value: Vec<String>,
    },
    /// Validate a template.
    Check {
        #[command(flatten)]
        source: TemplateSource,
        /// Date for deadline checks (YYYY-MM-DD); today by default.
        #[arg(long = "as-of")]
        as_of: Option<chrono::NaiveDate>,
    },
    /// Print the readiness checklist for a template.
    Report {
        #[command(flatten)]
        source: TemplateSource,
        /// Stored task whose score sheet to include.
        #[arg(long)]
        sheet: Option<String>,
        /// Accept templates with unfilled parts.
        #[arg(long = "allow-draft")]
        allow_draft: bool,
        #[arg(long = "as-of")]
        as_of: Option<chrono::NaiveDate>,
    },
}

#[derive(Debug, Args)]
pub struct PromptInput {
    /// Prompt kind: formulation, index_assessment or template_completion.
    #[arg(long, value_parser = parse_kind)]
    pub kind: crate::llm_bridge::PromptKind,
    /// Task text (repeatable for index_assessment).
    #[arg(long)]
    pub text: Vec<String>,
    /// Stored task (repeatable for index_assessment).
    #[arg(long = "task-id")]
    pub task_id: Vec<String>,
    /// Render exactly the published wording, without the answer-format
    /// instructions.
    #[arg(long)]
    pub verbatim: bool,
    /// Directory with replacement `<kind>.toml` prompt templates.
    #[arg(long)]
    pub prompts: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<crate::llm_bridge::PromptKind, String> {
    s.parse()
}

#[derive(Debug, Subcommand)]
pub enum PromptCmd {
    /// Print a rendered prompt.
    Emit {
        #[command(flatten)]
        input: PromptInput,
        /// Print the template with its blank left unfilled.
        #[arg(long, conflicts_with_all = ["text", "task_id"])]
        blank: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum LlmCmd {
    /// Render, submit and parse.
    Run {
        #[command(flatten)]
        input: PromptInput,
        /// Completion config TOML; environment variables otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Store the parsed result in the registry.
        #[arg(long)]
        record: bool,
    },
    /// Parse a saved completion.
    Parse {
        #[arg(long, value_parser = parse_kind)]
        kind: crate::llm_bridge::PromptKind,
        /// Completion text file ("-" for stdin).
        #[arg(long)]
        input: PathBuf,
        /// Stored tasks the completion is about, in prompt order.
        #[arg(long = "task-id")]
        task_id: Vec<String>,
        /// Task labels used in the prompt, when not "Task N".
        #[arg(long)]
        label: Vec<String>,
        #[arg(long)]
        record: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum IngestCmd {
    /// One description per non-blank line.
    Text {
        /// Input file ("-" for stdin).
        path: PathBuf,
        #[arg(long, default_value = "T")]
        prefix: String,
        #[arg(long = "dry-run")]
        dry_run: bool,
    },
    /// CSV with a header row.
    Csv {
        path: PathBuf,
        #[arg(long = "text-column")]
        text_column: String,
        #[arg(long = "id-column")]
        id_column: Option<String>,
        #[arg(long = "source-column")]
        source_column: Option<String>,
        #[arg(long, default_value = "T")]
        prefix: String,
        #[arg(long = "dry-run")]
        dry_run: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum RegistryCmd {
    /// Load, check integrity and print entity counts.
    Load,
    /// Rewrite the registry in canonical form, or copy it elsewhere.
    Save {
        #[arg(long)]
        to: Option<PathBuf>,
    },
}

/// A failed command: `Usage` exits 2, `Domain` exits 1.
#[derive(Debug)]
pub enum Failure {
    Usage { message: String, synopsis: String },
    Domain(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage { message, synopsis } => write!(f, "error: {message}\n\n{synopsis}"),
            Failure::Domain(m) => write!(f, "error: {m}"),
        }
    }
}

macro_rules! domain_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Domain(e.to_string())
            }
        }
    )*};
}

domain_from!(
    std::io::Error,
    crate::index::IndexError,
    crate::formulation::FormulationError,
    crate::spec_template::TemplateError,
    crate::llm_bridge::LlmError,
    crate::ingest::IngestError,
    crate::registry::RegistryError,
    crate::model::ModelError,
    serde_json::Error
);

/// Usage failure carrying the synopsis of the subcommand at `path`.
pub(crate) fn usage_error(path: &[&str], message: impl Into<String>) -> Failure {
    let mut cmd = Cli::command();
    cmd.build();
    let mut sub = &mut cmd;
    for name in path {
        sub = sub.find_subcommand_mut(name).expect("known subcommand path");
    }
    Failure::Usage {
        message: message.into(),
        synopsis: sub.render_usage().to_string(),
    }
}

/// Usage line of the deepest subcommand named in `args`.
fn synopsis_for(args: &[std::ffi::OsString]) -> String {
    let mut cmd = Cli::command();
    cmd.build();
    let mut sub = &mut cmd;
    for arg in args.iter().skip(1).filter_map(|a| a.to_str()) {
        if sub.find_subcommand(arg).is_none() {
            continue;
        }
        sub = sub.find_subcommand_mut(arg).expect("checked above");
    }
    sub.render_usage().to_string()
}

/// Runs one command line. Returns the process exit code.
pub fn dispatch<I, T>(args: I, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let mut text = e.render().to_string();
            if !text.contains("Usage:") {
                text.push('\n');
                text.push_str(&synopsis_for(&args));
                text.push('\n');
            }
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = commands::run(&cli, stdin, out, err);
    let _ = out.flush();
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "{f}");
            match f {
                Failure::Usage { .. } => EXIT_USAGE,
                Failure::Domain(_) => EXIT_DOMAIN,
            }
        }
    }
}
