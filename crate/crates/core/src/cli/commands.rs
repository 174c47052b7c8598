use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{NaiveDate, Utc};

use crate::formulation::{
    batch_check, check_unit_of_work, register_decomposition, DecompositionRecord, FormulationDiagnostics, Lexicon,
    Verdict,
};
use crate::index::{
    level_statement, make_score_sheet_from_slice, rank, AutomationScoreSheet, Condition, DraftScoreSheet,
    RANKING_HEADER,
};
use crate::ingest::{ingest_csv, ingest_text, ColumnMapping, IngestReport};
use crate::llm_bridge::{
    numbered_tasks, parse_score_assessments, parse_task_list, parse_template_draft, submit, CompletionConfig,
    Confidence, PromptKind, PromptLibrary, RenderedPrompt,
};
use crate::model::{Source, TaskDescription};
use crate::registry::{Registry, RegistryLock};
use crate::report::{emit, emit_ranking, Table};
use crate::spec_template::{readiness_report, skeleton, FieldValue, ReadinessOptions, TaskSpecTemplate, TemplateField};
use crate::text::strip_list_marker;

use super::{
    usage_error, Cli, Command, Failure, FormulateCmd, IndexCmd, IngestCmd, LlmCmd, PromptCmd, PromptInput, RegistryCmd,
    SpecCmd, TemplateSource,
};

type Res = Result<(), Failure>;

struct Io<'a> {
    stdin: &'a mut dyn BufRead,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

pub(super) fn run(cli: &Cli, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> Res {
    let mut io = Io { stdin, out, err };
    match &cli.command {
        Command::Formulate(c) => formulate(cli, c, &mut io),
        Command::Index(c) => index(cli, c, &mut io),
        Command::Spec(c) => spec(cli, c, &mut io),
        Command::Prompt(c) => prompt(cli, c, &mut io),
        Command::Llm(c) => llm(cli, c, &mut io),
        Command::Ingest(c) => ingest(cli, c, &mut io),
        Command::Registry(c) => registry(cli, c, &mut io),
    }
}

fn lexicon(cli: &Cli) -> Result<Lexicon, Failure> {
    match &cli.lexicon {
        Some(p) => Ok(Lexicon::from_file(p)?),
        None => Ok(Lexicon::bundled()),
    }
}

/// Read-only view; never takes the lock.
fn read_registry(cli: &Cli) -> Result<Registry, Failure> {
    Ok(Registry::open(&cli.registry)?)
}

/// Loads, mutates and saves under the write lock. Nothing is written when
/// `f` fails.
fn mutate<T>(cli: &Cli, f: impl FnOnce(&mut Registry) -> Result<T, Failure>) -> Result<T, Failure> {
    let lock = RegistryLock::acquire(&cli.registry)?;
    let mut reg = Registry::open(&cli.registry)?;
    let value = f(&mut reg)?;
    reg.save_locked(&lock)?;
    Ok(value)
}

fn stored_task<'r>(reg: &'r Registry, id: &str) -> Result<&'r TaskDescription, Failure> {
    reg.tasks
        .get(id)
        .ok_or_else(|| Failure::Domain(format!("no stored task {id:?} in {}", reg.root.display())))
}

fn read_input(path: &Path, stdin: &mut dyn BufRead) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        stdin.read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
    }
}

fn today() -> NaiveDate {
    Utc::now().date_naive()
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

// formulate

const DIAGNOSTICS_HEADER: [&str; 7] = [
    "Task",
    "Text",
    "Verdict",
    "Single agent",
    "Single action",
    "Single outcome",
    "Candidate actions",
];

fn diagnostics_table<'a>(rows: impl Iterator<Item = (&'a TaskDescription, &'a FormulationDiagnostics)>) -> Table {
    let mut table = Table::new(&DIAGNOSTICS_HEADER);
    for (task, d) in rows {
        let [agent, action, outcome] = d.criteria();
        let actions = d
            .evidence
            .as_ref()
            .map(|e| e.action_tokens().join("; "))
            .unwrap_or_default();
        table.push(vec![
            task.id.clone(),
            task.text.clone(),
            d.verdict().to_string(),
            agent.to_string(),
            action.to_string(),
            outcome.to_string(),
            actions,
        ]);
    }
    table
}

fn write_diagnostics(out: &mut dyn Write, task: &TaskDescription, d: &FormulationDiagnostics) -> Res {
    let [agent, action, outcome] = d.criteria();
    writeln!(out, "task: {}", task.id)?;
    writeln!(out, "text: {}", task.text)?;
    writeln!(out, "verdict: {}", d.verdict())?;
    writeln!(out, "single_agent: {agent}")?;
    writeln!(out, "single_action: {action}")?;
    writeln!(out, "single_outcome: {outcome}")?;
    if let Some(e) = &d.evidence {
        writeln!(out, "candidate_actions: {}", e.action_tokens().join(", "))?;
    }
    for note in &d.notes {
        writeln!(out, "note: {note}")?;
    }
    Ok(())
}

fn verdict_summary(diags: &[FormulationDiagnostics]) -> String {
    let count = |v: Verdict| diags.iter().filter(|d| d.verdict() == v).count();
    format!(
        "{} checked: {} pass, {} fail, {} needs_review",
        diags.len(),
        count(Verdict::Pass),
        count(Verdict::Fail),
        count(Verdict::NeedsReview)
    )
}

fn formulate(cli: &Cli, cmd: &FormulateCmd, io: &mut Io) -> Res {
    let lex = lexicon(cli)?;
    match cmd {
        FormulateCmd::Check { text: Some(text), .. } => {
            let task = TaskDescription::new("text", text.as_str(), Source::Manual)?;
            let d = check_unit_of_work(&task, &lex)?;
            write_diagnostics(io.out, &task, &d)
        }
        FormulateCmd::Check { task_id, record, .. } => {
            let reg = read_registry(cli)?;
            let tasks: Vec<TaskDescription> = if task_id.is_empty() {
                reg.tasks_in_order().into_iter().cloned().collect()
            } else {
                task_id
                    .iter()
                    .map(|id| stored_task(&reg, id).cloned())
                    .collect::<Result<_, _>>()?
            };
            if tasks.is_empty() {
                return Err(Failure::Domain(format!("no stored tasks in {}", reg.root.display())));
            }
            let diags = batch_check(&tasks, &lex);
            if task_id.len() == 1 {
                write_diagnostics(io.out, &tasks[0], &diags[0])?;
            } else {
                let table = diagnostics_table(tasks.iter().zip(&diags));
                io.out.write_all(emit(&table, cli.format).as_bytes())?;
            }
            writeln!(io.err, "{}", verdict_summary(&diags))?;
            if *record {
                let stored = mutate(cli, |reg| {
                    let mut n = 0;
                    for d in &diags {
                        if reg.tasks.contains_key(&d.task_id) {
                            reg.diagnostics.insert(d.task_id.clone(), d.clone());
                            n += 1;
                        }
                    }
                    Ok(n)
                })?;
                writeln!(io.err, "stored diagnostics for {stored} tasks")?;
            }
            Ok(())
        }
        FormulateCmd::Decompose {
            task_id,
            children,
            children_file,
            dry_run,
        } => {
            let reg = read_registry(cli)?;
            let parent = stored_task(&reg, task_id)?.clone();
            let child_texts: Vec<String> = match children_file {
                Some(path) => read_input(path, io.stdin)?
                    .lines()
                    .filter(|l| !l.trim().is_empty())
                    .map(|l| strip_list_marker(l).to_owned())
                    .collect(),
                None => children.clone(),
            };
            let record = register_decomposition(&parent, &child_texts, &lex)?;
            write_decomposition(cli, io, &record)?;
            if !dry_run {
                store_decomposition(cli, record)?;
                writeln!(io.err, "stored decomposition of {task_id}")?;
            }
            Ok(())
        }
    }
}

fn write_decomposition(cli: &Cli, io: &mut Io, record: &DecompositionRecord) -> Res {
    let table = diagnostics_table(record.children.iter().zip(&record.child_diagnostics));
    io.out.write_all(emit(&table, cli.format).as_bytes())?;
    writeln!(io.err, "{}", verdict_summary(&record.child_diagnostics))?;
    writeln!(
        io.err,
        "decomposition of {} accepted: {}",
        record.parent_id,
        yes_no(record.accepted)
    )?;
    Ok(())
}

fn store_decomposition(cli: &Cli, record: DecompositionRecord) -> Res {
    mutate(cli, |reg| {
        stored_task(reg, &record.parent_id)?;
        if reg.decompositions.iter().any(|d| d.parent_id == record.parent_id) {
            return Err(Failure::Domain(format!(
                "task {:?} already has a recorded decomposition",
                record.parent_id
            )));
        }
        if let Some(clash) = record.children.iter().find(|c| reg.tasks.contains_key(&c.id)) {
            return Err(Failure::Domain(format!("task id {:?} is already in use", clash.id)));
        }
        for (child, diag) in record.children.iter().zip(&record.child_diagnostics) {
            reg.upsert_task(child.clone());
            reg.diagnostics.insert(child.id.clone(), diag.clone());
        }
        reg.decompositions.push(record);
        Ok(())
    })
}

// index

fn write_sheet(out: &mut dyn Write, sheet: &AutomationScoreSheet, show_id: bool) -> Res {
    if show_id {
        writeln!(out, "task: {}", sheet.task_id)?;
    }
    for c in Condition::ALL {
        writeln!(out, "{}: {}", c.key(), sheet.level(c))?;
    }
    writeln!(out, "total: {}", sheet.total())?;
    writeln!(out, "band: {}", sheet.band().label())?;
    Ok(())
}

/// Walks the assessor through the five conditions, printing each level
/// statement and reading a 0-4 answer per condition. Invalid answers are
/// asked again; end of input aborts.
fn questionnaire(task_id: &str, text: Option<&str>, io: &mut Io) -> Result<[u8; 5], Failure> {
    let mut draft = DraftScoreSheet::new(task_id);
    if let Some(text) = text {
        writeln!(io.out, "Task {task_id}: {text}")?;
    }
    for (i, c) in Condition::ALL.into_iter().enumerate() {
        writeln!(io.out)?;
        writeln!(io.out, "[{}/5] {}", i + 1, c.title())?;
        writeln!(io.out, "{}", c.interactive_prompt())?;
        for points in 0..=crate::index::MAX_POINTS {
            writeln!(io.out, "  {points}: {}", level_statement(c, points)?.display_text())?;
        }
        loop {
            write!(io.out, "Points (0-4): ")?;
            io.out.flush()?;
            let mut line = String::new();
            if io.stdin.read_line(&mut line)? == 0 {
                return Err(Failure::Domain(format!("input ended before {} was scored", c.key())));
            }
            match line.trim().parse::<u8>() {
                Ok(p) if draft.set(c, p).is_ok() => break,
                _ => writeln!(io.err, "enter a whole number from 0 to 4")?,
            }
        }
    }
    writeln!(io.out)?;
    Ok(draft.finalize()?.levels())
}

fn index(cli: &Cli, cmd: &IndexCmd, io: &mut Io) -> Res {
    match cmd {
        IndexCmd::Score {
            task_id,
            levels,
            interactive,
            record,
            assessor,
            notes,
        } => {
            let id = task_id.as_deref().unwrap_or("unassigned");
            let levels = if *interactive {
                let text = match task_id {
                    Some(id) => read_registry(cli)?.tasks.get(id).map(|t| t.text.clone()),
                    None => None,
                };
                questionnaire(id, text.as_deref(), io)?.to_vec()
            } else {
                levels.clone()
            };
            let mut sheet = make_score_sheet_from_slice(id, &levels)?;
            sheet.assessor = assessor.clone();
            sheet.notes = notes.clone();
            write_sheet(io.out, &sheet, task_id.is_some())?;
            if *record {
                mutate(cli, |reg| {
                    stored_task(reg, id)?;
                    reg.sheets.insert(id.to_owned(), sheet);
                    Ok(())
                })?;
                writeln!(io.err, "stored score sheet for {id}")?;
            }
            Ok(())
        }
        IndexCmd::Rank { task_id } => {
            let reg = read_registry(cli)?;
            let mut entries = Vec::new();
            if task_id.is_empty() {
                for t in reg.tasks_in_order() {
                    if let Some(s) = reg.sheets.get(&t.id) {
                        entries.push((t.clone(), s.clone()));
                    }
                }
            } else {
                for id in task_id {
                    let t = stored_task(&reg, id)?;
                    let s = reg
                        .sheets
                        .get(id)
                        .ok_or_else(|| Failure::Domain(format!("task {id:?} has no score sheet")))?;
                    entries.push((t.clone(), s.clone()));
                }
            }
            let table = rank(&entries)?;
            io.out.write_all(emit_ranking(&table, cli.format).as_bytes())?;
            Ok(())
        }
        IndexCmd::Statements => {
            let mut table = Table::new(&["Condition", "Points", "Statement"]);
            table.numeric[1] = true;
            for s in crate::index::all_statements() {
                table.push(vec![
                    s.condition.title().to_owned(),
                    s.points.to_string(),
                    s.display_text().to_owned(),
                ]);
            }
            io.out.write_all(emit(&table, cli.format).as_bytes())?;
            Ok(())
        }
    }
}

// spec

fn template_from_file(path: &Path) -> Result<TaskSpecTemplate, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn load_template(cli: &Cli, source: &TemplateSource) -> Result<TaskSpecTemplate, Failure> {
    match (&source.id, &source.file) {
        (_, Some(path)) => template_from_file(path),
        (Some(id), None) => read_registry(cli)?
            .templates
            .get(id)
            .cloned()
            .ok_or_else(|| Failure::Domain(format!("no stored template {id:?}"))),
        (None, None) => unreachable!("clap requires one source"),
    }
}

fn spec(cli: &Cli, cmd: &SpecCmd, io: &mut Io) -> Res {
    let lex = lexicon(cli)?;
    match cmd {
        SpecCmd::New {
            task_id,
            file,
            date,
            force,
        } => {
            let template = match (task_id, file) {
                (_, Some(path)) => template_from_file(path)?,
                (Some(id), None) => {
                    let reg = read_registry(cli)?;
                    skeleton(stored_task(&reg, id)?, date.unwrap_or_else(today))
                }
                (None, None) => unreachable!("clap requires a task id or file"),
            };
            let uid = template.typed_unique_id()?.to_string();
            mutate(cli, |reg| {
                if reg.templates.contains_key(&uid) && !force {
                    return Err(Failure::Domain(format!(
                        "template {uid:?} already exists (use --force to replace it)"
                    )));
                }
                reg.templates.insert(uid.clone(), template.clone());
                Ok(())
            })?;
            writeln!(io.out, "template: {uid}")?;
            writeln!(io.out, "filled: {}", template.completeness().fraction())?;
            Ok(())
        }
        SpecCmd::Set { id, field, value } => {
            let field: TemplateField = field
                .parse()
                .map_err(|e: crate::spec_template::TemplateError| usage_error(&["spec", "set"], e.to_string()))?;
            let value = match value.as_slice() {
                [single] => FieldValue::Text(single.clone()),
                many if field.is_list() => FieldValue::List(many.to_vec()),
                _ => {
                    return Err(usage_error(
                        &["spec", "set"],
                        format!("--value may be given once for {}", field.name()),
                    ))
                }
            };
            let next = mutate(cli, |reg| {
                let current = reg
                    .templates
                    .get(id)
                    .ok_or_else(|| Failure::Domain(format!("no stored template {id:?}")))?;
                let next = current.set_field(field, value, &lex)?;
                if next.unique_id != *id {
                    if reg.templates.contains_key(&next.unique_id) {
                        return Err(Failure::Domain(format!("template {:?} already exists", next.unique_id)));
                    }
                    reg.templates.remove(id);
                }
                reg.templates.insert(next.unique_id.clone(), next.clone());
                Ok(next)
            })?;
            writeln!(io.out, "template: {}", next.unique_id)?;
            writeln!(io.out, "set: {}", field.name())?;
            writeln!(io.out, "filled: {}", next.completeness().fraction())?;
            Ok(())
        }
        SpecCmd::Check { source, as_of } => {
            let t = load_template(cli, source)?;
            let report = t.validate_as_of(&lex, as_of.unwrap_or_else(today));
            writeln!(io.out, "template: {}", t.unique_id)?;
            if let Ok(Some(d)) = t.typed_deadline() {
                writeln!(io.out, "deadline: {d}")?;
            }
            writeln!(io.out, "filled: {}", t.completeness().fraction())?;
            for f in report.findings() {
                writeln!(io.out, "{} {}: {}", f.severity, f.field, f.message)?;
            }
            writeln!(io.out, "ok: {}", yes_no(report.ok()))?;
            if report.ok() {
                Ok(())
            } else {
                Err(Failure::Domain(format!(
                    "template {:?} has {} errors",
                    t.unique_id,
                    report.errors().count()
                )))
            }
        }
        SpecCmd::Report {
            source,
            sheet,
            allow_draft,
            as_of,
        } => {
            let t = load_template(cli, source)?;
            let sheet = match sheet {
                Some(id) => Some(
                    read_registry(cli)?
                        .sheets
                        .get(id)
                        .cloned()
                        .ok_or_else(|| Failure::Domain(format!("task {id:?} has no score sheet")))?,
                ),
                None => None,
            };
            let options = ReadinessOptions {
                allow_draft: *allow_draft,
                as_of: *as_of,
            };
            let report = readiness_report(&t, sheet.as_ref(), &lex, options)?;
            io.out.write_all(report.narrative.as_bytes())?;
            if !report.narrative.ends_with('\n') {
                writeln!(io.out)?;
            }
            Ok(())
        }
    }
}

// prompts

/// The tasks a prompt is about: optional stored id, label, text.
struct PromptTask {
    id: Option<String>,
    label: String,
    text: String,
}

fn prompt_library(input: &PromptInput) -> Result<PromptLibrary, Failure> {
    match &input.prompts {
        Some(dir) => Ok(PromptLibrary::with_overrides(dir)?),
        None => Ok(PromptLibrary::bundled()),
    }
}

fn prompt_tasks(cli: &Cli, input: &PromptInput, path: &[&str]) -> Result<Vec<PromptTask>, Failure> {
    let mut items: Vec<(Option<String>, String)> = input.text.iter().map(|t| (None, t.clone())).collect();
    if !input.task_id.is_empty() {
        let reg = read_registry(cli)?;
        for id in &input.task_id {
            items.push((Some(id.clone()), stored_task(&reg, id)?.text.clone()));
        }
    }
    if items.is_empty() {
        return Err(usage_error(path, "give --text or --task-id"));
    }
    if input.kind != PromptKind::IndexAssessment && items.len() != 1 {
        return Err(usage_error(
            path,
            format!("the {} prompt takes exactly one task", input.kind),
        ));
    }
    let labels = numbered_tasks(&items.iter().map(|(_, t)| t.as_str()).collect::<Vec<_>>());
    Ok(items
        .into_iter()
        .zip(labels)
        .map(|((id, text), (label, _))| PromptTask { id, label, text })
        .collect())
}

fn render(
    lib: &PromptLibrary,
    kind: PromptKind,
    tasks: &[PromptTask],
    verbatim: bool,
) -> Result<RenderedPrompt, Failure> {
    Ok(match kind {
        PromptKind::Formulation => lib.render_formulation_prompt(&tasks[0].text, verbatim)?,
        PromptKind::TemplateCompletion => lib.render_template_prompt(&tasks[0].text, verbatim)?,
        PromptKind::IndexAssessment => {
            let pairs: Vec<(String, String)> = tasks.iter().map(|t| (t.label.clone(), t.text.clone())).collect();
            lib.render_index_prompt(&pairs, verbatim)?
        }
    })
}

fn write_text(out: &mut dyn Write, text: &str) -> Res {
    out.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        writeln!(out)?;
    }
    Ok(())
}

fn prompt(cli: &Cli, cmd: &PromptCmd, io: &mut Io) -> Res {
    let PromptCmd::Emit { input, blank } = cmd;
    let lib = prompt_library(input)?;
    if *blank {
        let t = lib.get(input.kind);
        let mut text = t.verbatim_text();
        if !input.verbatim && !t.addendum.is_empty() {
            text.push('\n');
            text.push_str(&t.addendum);
        }
        return write_text(io.out, &text);
    }
    let tasks = prompt_tasks(cli, input, &["prompt", "emit"])?;
    let rendered = render(&lib, input.kind, &tasks, input.verbatim)?;
    write_text(io.out, &rendered.text)
}

// llm

fn completion_config(path: Option<&Path>) -> Result<CompletionConfig, Failure> {
    let config = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Domain(format!("{}: {e}", p.display())))?;
            toml::from_str::<CompletionConfig>(&text).map_err(|e| Failure::Domain(format!("{}: {e}", p.display())))?
        }
        None => return Ok(CompletionConfig::from_env()?),
    };
    config.check()?;
    Ok(config)
}

fn note_confidence(io: &mut Io, confidence: Confidence) -> Res {
    if confidence == Confidence::Heuristic {
        writeln!(
            io.err,
            "warning: the answer did not follow the requested layout; review the parsed result"
        )?;
    }
    Ok(())
}

/// Parses `completion` for `kind`, prints the result and stores it when
/// `record` is set.
fn consume(cli: &Cli, io: &mut Io, kind: PromptKind, completion: &str, tasks: &[PromptTask], record: bool) -> Res {
    let path: &[&str] = &["llm", "parse"];
    match kind {
        PromptKind::Formulation => {
            let parsed = parse_task_list(completion)?;
            note_confidence(io, parsed.confidence)?;
            if !record {
                for (i, t) in parsed.payload.iter().enumerate() {
                    writeln!(io.out, "{}. {t}", i + 1)?;
                }
                return Ok(());
            }
            let parent_id = match tasks {
                [PromptTask { id: Some(id), .. }] => id,
                _ => return Err(usage_error(path, "--record needs the parent as a single --task-id")),
            };
            let reg = read_registry(cli)?;
            let record = register_decomposition(stored_task(&reg, parent_id)?, &parsed.payload, &lexicon(cli)?)?;
            write_decomposition(cli, io, &record)?;
            store_decomposition(cli, record)?;
            writeln!(io.err, "stored decomposition of {parent_id}")?;
            Ok(())
        }
        PromptKind::IndexAssessment => {
            let labels: Vec<String> = tasks.iter().map(|t| t.label.clone()).collect();
            let parsed = parse_score_assessments(completion, &labels)?;
            note_confidence(io, parsed.confidence)?;
            let mut table = Table::new(&RANKING_HEADER);
            table.numeric = (0..RANKING_HEADER.len()).map(|i| i > 0).collect();
            for a in &parsed.payload {
                let mut row = vec![a.label.clone()];
                row.extend(a.sheet.levels().iter().map(u8::to_string));
                row.push(a.sheet.total().to_string());
                table.push(row);
                for note in &a.notes {
                    writeln!(io.err, "{}: {note}", a.label)?;
                }
            }
            io.out.write_all(emit(&table, cli.format).as_bytes())?;
            if record {
                let ids: Vec<&str> = tasks.iter().filter_map(|t| t.id.as_deref()).collect();
                if ids.len() != tasks.len() {
                    return Err(usage_error(path, "--record needs every task given as --task-id"));
                }
                mutate(cli, |reg| {
                    for (id, a) in ids.iter().zip(&parsed.payload) {
                        stored_task(reg, id)?;
                        reg.sheets.insert((*id).to_owned(), a.sheet_for(id));
                    }
                    Ok(())
                })?;
                writeln!(io.err, "stored {} score sheets", ids.len())?;
            }
            Ok(())
        }
        PromptKind::TemplateCompletion => {
            let parsed = parse_template_draft(completion)?;
            note_confidence(io, parsed.confidence)?;
            let t = parsed.payload;
            for field in TemplateField::ALL {
                match t.get(field) {
                    FieldValue::Text(s) => writeln!(io.out, "{}: {s}", field.label())?,
                    FieldValue::List(items) => {
                        writeln!(io.out, "{}:", field.label())?;
                        for item in items {
                            writeln!(io.out, "- {item}")?;
                        }
                    }
                }
            }
            writeln!(io.out, "filled: {}", t.completeness().fraction())?;
            if record {
                let uid = t.typed_unique_id()?.to_string();
                mutate(cli, |reg| {
                    if reg.templates.contains_key(&uid) {
                        return Err(Failure::Domain(format!("template {uid:?} already exists")));
                    }
                    reg.templates.insert(uid.clone(), t.clone());
                    Ok(())
                })?;
                writeln!(io.err, "stored template {uid}")?;
            }
            Ok(())
        }
    }
}

fn llm(cli: &Cli, cmd: &LlmCmd, io: &mut Io) -> Res {
    match cmd {
        LlmCmd::Run { input, config, record } => {
            let config = completion_config(config.as_deref())?;
            let lib = prompt_library(input)?;
            let tasks = prompt_tasks(cli, input, &["llm", "run"])?;
            let rendered = render(&lib, input.kind, &tasks, input.verbatim)?;
            let completion = submit(&config, &rendered)?;
            consume(cli, io, input.kind, &completion, &tasks, *record)
        }
        LlmCmd::Parse {
            kind,
            input,
            task_id,
            label,
            record,
        } => {
            let completion = read_input(input, io.stdin)?;
            let tasks: Vec<PromptTask> = if !label.is_empty() {
                if !task_id.is_empty() && task_id.len() != label.len() {
                    return Err(usage_error(&["llm", "parse"], "give one --label per --task-id"));
                }
                label
                    .iter()
                    .enumerate()
                    .map(|(i, l)| PromptTask {
                        id: task_id.get(i).cloned(),
                        label: l.clone(),
                        text: String::new(),
                    })
                    .collect()
            } else {
                task_id
                    .iter()
                    .enumerate()
                    .map(|(i, id)| PromptTask {
                        id: Some(id.clone()),
                        label: format!("Task {}", i + 1),
                        text: String::new(),
                    })
                    .collect()
            };
            if *kind == PromptKind::IndexAssessment && tasks.is_empty() {
                return Err(usage_error(
                    &["llm", "parse"],
                    "give --task-id or --label for each assessed task",
                ));
            }
            consume(cli, io, *kind, &completion, &tasks, *record)
        }
    }
}

// ingest

fn write_ingest(cli: &Cli, io: &mut Io, tasks: &[TaskDescription], report: &IngestReport) -> Res {
    let mut table = Table::new(&["Task", "Text"]);
    for t in tasks {
        table.push(vec![t.id.clone(), t.text.clone()]);
    }
    io.out.write_all(emit(&table, cli.format).as_bytes())?;
    for r in &report.rejected {
        writeln!(io.err, "{}: record {}: {}", report.source, r.record, r.reason)?;
    }
    writeln!(
        io.err,
        "{}: {} accepted, {} rejected",
        report.source,
        report.accepted,
        report.rejected.len()
    )?;
    Ok(())
}

fn store_tasks(cli: &Cli, tasks: Vec<TaskDescription>) -> Result<usize, Failure> {
    mutate(cli, |reg| {
        let mut added = 0;
        for t in tasks {
            match reg.tasks.get(&t.id) {
                Some(existing) if existing.text == t.text => {}
                Some(existing) => {
                    return Err(Failure::Domain(format!(
                        "task id {:?} is already stored with different text ({:?}); use another --prefix",
                        t.id, existing.text
                    )))
                }
                None => {
                    reg.upsert_task(t);
                    added += 1;
                }
            }
        }
        Ok(added)
    })
}

fn ingest(cli: &Cli, cmd: &IngestCmd, io: &mut Io) -> Res {
    let (tasks, report, dry_run) = match cmd {
        IngestCmd::Text { path, prefix, dry_run } => {
            let label = path.display().to_string();
            let (tasks, report) = if path.as_os_str() == "-" {
                ingest_text(&mut *io.stdin, prefix, &label)?
            } else {
                let file = fs::File::open(path).map_err(|e| Failure::Domain(format!("{label}: {e}")))?;
                ingest_text(BufReader::new(file), prefix, &label)?
            };
            (tasks, report, *dry_run)
        }
        IngestCmd::Csv {
            path,
            text_column,
            id_column,
            source_column,
            prefix,
            dry_run,
        } => {
            let label = path.display().to_string();
            let mapping = ColumnMapping {
                text: text_column.clone(),
                id: id_column.clone(),
                source: source_column.clone(),
            };
            let (tasks, report) = if path.as_os_str() == "-" {
                ingest_csv(&mut *io.stdin, &mapping, prefix, &label)?
            } else {
                let file = fs::File::open(path).map_err(|e| Failure::Domain(format!("{label}: {e}")))?;
                ingest_csv(file, &mapping, prefix, &label)?
            };
            (tasks, report, *dry_run)
        }
    };
    write_ingest(cli, io, &tasks, &report)?;
    if !dry_run {
        let added = store_tasks(cli, tasks)?;
        writeln!(io.err, "stored {added} new tasks in {}", cli.registry.display())?;
    }
    Ok(())
}

// registry

fn registry(cli: &Cli, cmd: &RegistryCmd, io: &mut Io) -> Res {
    match cmd {
        RegistryCmd::Load => {
            let reg = Registry::load(&cli.registry)?;
            writeln!(io.out, "registry: {}", reg.root.display())?;
            writeln!(io.out, "tasks: {}", reg.tasks.len())?;
            writeln!(io.out, "diagnostics: {}", reg.diagnostics.len())?;
            writeln!(io.out, "score sheets: {}", reg.sheets.len())?;
            writeln!(io.out, "templates: {}", reg.templates.len())?;
            writeln!(io.out, "decompositions: {}", reg.decompositions.len())?;
            Ok(())
        }
        RegistryCmd::Save { to } => {
            let lock = RegistryLock::acquire(&cli.registry)?;
            let mut reg = Registry::load(&cli.registry)?;
            match to {
                Some(dest) => {
                    reg.root = dest.clone();
                    reg.save()?;
                }
                None => reg.save_locked(&lock)?,
            }
            writeln!(io.out, "saved: {}", reg.root.display())?;
            Ok(())
        }
    }
}
