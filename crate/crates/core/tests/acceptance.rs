//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod common;

use std::fs;
use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use cm_core::formulation::CriterionResult;
use cm_core::formulation::{
    analyze_actions, batch_check, check_unit_of_work, register_decomposition, Lexicon, Verdict,
};
use cm_core::index::{interpret, make_score_sheet, rank, InterpretationBand, RANKING_HEADER};
use cm_core::ingest::ingest_text;
use cm_core::llm_bridge::{numbered_tasks, PromptKind, PromptLibrary};
use cm_core::model::{Source, TaskDescription};
use cm_core::registry::Registry;
use cm_core::spec_template::TaskSpecTemplate;
use common::fuzz::random_registry;
use common::{fixture, run_cli, test_fixture};

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(elapsed: Duration, limit: Duration) -> Outcome {
    ensure!(elapsed < limit, "took {elapsed:?}, limit {limit:?}");
    Ok(format!("{elapsed:.2?}"))
}

fn expected_band(total: u8) -> &'static str {
    match total {
        16..=20 => "Highly Suitable for Automation",
        12..=15 => "Suitable for Automation",
        8..=11 => "Moderately Suitable for Automation",
        4..=7 => "Limited Suitability for Automation",
        _ => "Not Suitable for Automation",
    }
}

fn rubric_exhaustiveness() -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    for code in 0..5u32.pow(5) {
        let mut levels = [0u8; 5];
        let mut rest = code;
        for l in &mut levels {
            *l = (rest % 5) as u8;
            rest /= 5;
        }
        let sheet = make_score_sheet("T", levels).map_err(|e| e.to_string())?;
        let sum: u8 = levels.iter().sum();
        ensure!(sheet.total() == sum && sum <= 20, "{levels:?}: total {}", sheet.total());
        ensure!(
            sheet.band().label() == expected_band(sum),
            "{levels:?}: band {}",
            sheet.band()
        );
        count += 1;
    }
    for (low, high) in [(3, 4), (7, 8), (11, 12), (15, 16)] {
        let a = interpret(low).map_err(|e| e.to_string())?;
        let b = interpret(high).map_err(|e| e.to_string())?;
        ensure!(
            a != b && a.range().1 == low && b.range().0 == high,
            "boundary {low}|{high}"
        );
    }
    ensure!(interpret(21).is_err(), "21 accepted");
    within(start.elapsed(), Duration::from_secs(1)).map(|t| format!("{count} combinations, 4 boundaries, {t}"))
}

fn band_table() -> Outcome {
    let published = [
        (16, 20, "Highly Suitable for Automation"),
        (12, 15, "Suitable for Automation"),
        (8, 11, "Moderately Suitable for Automation"),
        (4, 7, "Limited Suitability for Automation"),
        (0, 3, "Not Suitable for Automation"),
    ];
    for (low, high, label) in published {
        for total in low..=high {
            let band = interpret(total).map_err(|e| e.to_string())?;
            ensure!(band.label() == label, "{total} -> {band}");
        }
    }
    let ranges: Vec<(u8, u8)> = InterpretationBand::ALL.iter().rev().map(|b| b.range()).collect();
    let expected: Vec<(u8, u8)> = published.iter().map(|&(l, h, _)| (l, h)).collect();
    ensure!(ranges == expected, "ranges {ranges:?}");
    Ok("21 totals, 5 bands".into())
}

fn worked_template() -> Outcome {
    let text = fs::read_to_string(fixture("cpapm_template.json")).map_err(|e| e.to_string())?;
    let t: TaskSpecTemplate = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let report = t.validate(&Lexicon::bundled());
    ensure!(report.ok(), "findings: {:?}", report.findings());
    ensure!(
        t.completeness().fraction() == "16/16",
        "completeness {}",
        t.completeness().fraction()
    );
    ensure!(t.unique_id == "CPAPM-20240201", "unique id {}", t.unique_id);
    let deadline = t.typed_deadline().map_err(|e| e.to_string())?.ok_or("no deadline")?;
    ensure!(deadline.render() == "04/15/2024", "deadline {}", deadline.render());
    Ok(format!("{} 16/16 {}", t.unique_id, deadline.render()))
}

fn task(id: &str, text: &str) -> TaskDescription {
    TaskDescription::new(id, text, Source::Manual).expect("non-empty text")
}

fn formulation_fixtures() -> Outcome {
    let lex = Lexicon::bundled();
    let pass = check_unit_of_work(&task("a", "Draft the schedule for trade shows this year"), &lex)
        .map_err(|e| e.to_string())?;
    ensure!(pass.verdict() == Verdict::Pass, "draft: {:?}", pass.verdict());
    let confirm = check_unit_of_work(
        &task("b", "Confirm product availability with production managers"),
        &lex,
    )
    .map_err(|e| e.to_string())?;
    ensure!(confirm.verdict() == Verdict::Pass, "confirm: {:?}", confirm.verdict());
    let parent = task(
        "P",
        "Coordinate or participate in promotional activities or trade shows, working with developers, advertisers, or production managers, to market products or services",
    );
    let broad = check_unit_of_work(&parent, &lex).map_err(|e| e.to_string())?;
    ensure!(broad.verdict() == Verdict::Fail, "broad: {:?}", broad.verdict());
    ensure!(
        broad.single_action() == CriterionResult::Fail,
        "broad single_action: {:?}",
        broad.single_action()
    );

    let children: Vec<String> = fs::read_to_string(fixture("trade_show_children.txt"))
        .map_err(|e| e.to_string())?
        .lines()
        .map(str::to_owned)
        .collect();
    ensure!(children.len() == 16, "{} children", children.len());
    let record = register_decomposition(&parent, &children, &lex).map_err(|e| e.to_string())?;
    let failing: Vec<&str> = record
        .child_diagnostics
        .iter()
        .zip(&children)
        .filter(|(d, _)| d.verdict() == Verdict::Fail)
        .map(|(_, c)| c.as_str())
        .collect();
    ensure!(failing.is_empty(), "failing children: {failing:?}");
    ensure!(record.accepted, "decomposition not accepted");
    let passing = record
        .child_diagnostics
        .iter()
        .filter(|d| d.verdict() == Verdict::Pass)
        .count();
    Ok(format!(
        "3 fixtures exact, 16 children: {passing} pass, {} needs_review",
        16 - passing
    ))
}

fn corpus_annotations() -> Outcome {
    let lex = Lexicon::bundled();
    let file = fs::File::open(fixture("onet_corporate_communications.txt")).map_err(|e| e.to_string())?;
    let (tasks, _) = ingest_text(std::io::BufReader::new(file), "T", "onet").map_err(|e| e.to_string())?;
    ensure!(tasks.len() == 18, "{} descriptions", tasks.len());
    let mut reader = csv::Reader::from_path(fixture("onet_action_annotations.csv")).map_err(|e| e.to_string())?;
    let mut multi = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| e.to_string())?;
        let line: usize = row[0].parse().map_err(|_| "bad line number")?;
        if &row[3] == "true" {
            multi.push(line);
        }
    }

    let start = Instant::now();
    let diagnostics = batch_check(&tasks, &lex);
    let elapsed = start.elapsed();
    let mut problems = Vec::new();
    for &line in &multi {
        let text = &tasks[line - 1].text;
        let found = analyze_actions(text, &lex)
            .map_err(|e| e.to_string())?
            .candidate_actions
            .len();
        if found < 2 {
            problems.push(format!("line {line}: {found} candidates"));
        }
        if diagnostics[line - 1].verdict() == Verdict::Pass {
            problems.push(format!("line {line}: pass"));
        }
    }
    ensure!(problems.is_empty(), "{}", problems.join("; "));
    within(elapsed, Duration::from_secs(1))
        .map(|t| format!("{}/{} multi-action flagged, none pass, {t}", multi.len(), multi.len()))
}

fn prompt_fidelity() -> Outcome {
    let lib = PromptLibrary::bundled();
    for (kind, name) in [
        (PromptKind::Formulation, "prompt_formulation.txt"),
        (PromptKind::IndexAssessment, "prompt_index_assessment.txt"),
        (PromptKind::TemplateCompletion, "prompt_template_completion.txt"),
    ] {
        let rendered = match kind {
            PromptKind::Formulation => lib.render_formulation_prompt("Plan events", true),
            PromptKind::TemplateCompletion => lib.render_template_prompt("Plan events", true),
            PromptKind::IndexAssessment => lib.render_index_prompt(&numbered_tasks(&["Plan events"]), true),
        }
        .map_err(|e| e.to_string())?;
        let expected = fs::read(test_fixture(name)).map_err(|e| e.to_string())?;
        ensure!(rendered.restore_blanks().into_bytes() == expected, "{name} differs");
    }
    Ok("3 prompts byte-identical".into())
}

fn round_trip() -> Outcome {
    let lex = Lexicon::bundled();
    let mut rng = StdRng::seed_from_u64(2024);
    let base = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let mut tasks = 0;
    for i in 0..1000 {
        let reg = random_registry(&mut rng, base.path().join(i.to_string()), &lex);
        tasks += reg.tasks.len();
        reg.save().map_err(|e| format!("registry {i}: {e}"))?;
        let loaded = Registry::load(&reg.root).map_err(|e| format!("registry {i}: {e}"))?;
        ensure!(loaded == reg, "registry {i} differs after reload");
    }
    within(start.elapsed(), Duration::from_secs(30)).map(|t| format!("1000 registries, {tasks} tasks, {t}"))
}

fn ranking_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(99);
    let start = Instant::now();
    for case in 0..10_000 {
        let len = rng.random_range(0..=50);
        let entries: Vec<_> = (0..len)
            .map(|i| {
                let id = format!("T{i}");
                let levels: [u8; 5] = std::array::from_fn(|_| rng.random_range(0..=4));
                (
                    task(&id, &format!("task {i}")),
                    make_score_sheet(id.clone(), levels).unwrap(),
                )
            })
            .collect();
        let table = rank(&entries).map_err(|e| e.to_string())?;
        ensure!(table.header == RANKING_HEADER, "header changed");

        // Selection of the earliest maximum: a stable descending sort.
        let mut pool: Vec<(String, u8)> = entries.iter().map(|(t, s)| (t.id.clone(), s.total())).collect();
        let mut expected = Vec::with_capacity(pool.len());
        while !pool.is_empty() {
            let mut best = 0;
            for j in 1..pool.len() {
                if pool[j].1 > pool[best].1 {
                    best = j;
                }
            }
            expected.push(pool.remove(best));
        }
        let got: Vec<(String, u8)> = table.rows.iter().map(|r| (r.task_id.clone(), r.total)).collect();
        ensure!(got == expected, "case {case} (length {len}) differs");
    }
    within(start.elapsed(), Duration::from_secs(10)).map(|t| format!("10000 lists, {t}"))
}

fn parser_authority() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let reg = dir.path().join("reg");
    let reg_arg = reg.to_str().unwrap();
    let corpus = fixture("onet_corporate_communications.txt");
    let (code, _, err) = run_cli(&["--registry", reg_arg, "ingest", "text", corpus.to_str().unwrap()], "");
    ensure!(code == 0, "ingest: {err}");
    let answer = test_fixture("completion_scores_discrepancy.txt");
    let (code, _, err) = run_cli(
        &[
            "--registry",
            reg_arg,
            "llm",
            "parse",
            "--kind",
            "index",
            "--input",
            answer.to_str().unwrap(),
            "--task-id",
            "T-1",
            "--task-id",
            "T-2",
            "--task-id",
            "T-3",
            "--record",
        ],
        "",
    );
    ensure!(code == 0, "parse: {err}");
    // (task, levels in the answer, total stated in the answer)
    let cases = [("T-1", 14, 15), ("T-2", 17, 17), ("T-3", 5, 4)];
    let loaded = Registry::load(&reg).map_err(|e| e.to_string())?;
    for (id, sum, stated) in cases {
        let stored: serde_json::Value = serde_json::from_str(
            &fs::read_to_string(reg.join("sheets").join(format!("{id}.json"))).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        ensure!(stored["total"] == sum, "{id}: stored total {}", stored["total"]);
        let sheet = &loaded.sheets[id];
        ensure!(sheet.total() == sum, "{id}: total {}", sheet.total());
        let note = sheet.notes.as_deref().unwrap_or("");
        if sum != stated {
            ensure!(
                note.contains(&format!("stated total {stated} differs")),
                "{id}: note {note:?}"
            );
            ensure!(
                err.contains(&format!("stated total {stated} differs")),
                "{id}: no warning"
            );
        } else {
            ensure!(note.is_empty(), "{id}: unexpected note {note:?}");
        }
    }
    Ok("2 discrepancies noted, stored totals are local sums".into())
}

fn run_bin(bin: &str, args: &[&str], stdin: &str) -> Result<(String, String), String> {
    let mut child = Command::new(bin)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| e.to_string())?;
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .map_err(|e| e.to_string())?;
    let output = child.wait_with_output().map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&output.stdout).into_owned();
    let stderr = String::from_utf8_lossy(&output.stderr).into_owned();
    ensure!(
        output.status.success(),
        "{args:?} exited {:?}: {stderr}",
        output.status.code()
    );
    Ok((stdout, stderr))
}

fn end_to_end() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_cm");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let reg = dir.path().join("reg");
    let reg = reg.to_str().unwrap();
    let corpus = fixture("onet_corporate_communications.txt");
    let corpus = corpus.to_str().unwrap();

    let start = Instant::now();
    run_bin(bin, &["--registry", reg, "ingest", "text", corpus], "")?;
    let (_, summary) = run_bin(bin, &["--registry", reg, "formulate", "check", "--all", "--record"], "")?;
    ensure!(summary.contains("18 checked"), "check summary: {summary}");
    let scripted = [
        ("T-2", "4\n4\n3\n2\n3\n"),
        ("T-4", "2\n2\n1\n1\n1\n"),
        ("T-14", "3\n3\n4\n3\n4\n"),
    ];
    for (id, answers) in scripted {
        run_bin(
            bin,
            &[
                "--registry",
                reg,
                "index",
                "score",
                "--task-id",
                id,
                "--interactive",
                "--record",
                "--assessor",
                "acceptance",
            ],
            answers,
        )?;
    }
    let (table, _) = run_bin(bin, &["--registry", reg, "--format", "markdown", "index", "rank"], "")?;
    let elapsed = start.elapsed();

    let lines: Vec<&str> = table.lines().collect();
    let header = format!("| {} |", RANKING_HEADER.join(" | "));
    ensure!(lines.first() == Some(&header.as_str()), "header {:?}", lines.first());
    ensure!(lines.len() == 5, "{} table lines", lines.len());
    let totals: Vec<&str> = lines[2..]
        .iter()
        .map(|l| l.trim_end_matches(" |").rsplit(" | ").next().unwrap())
        .collect();
    ensure!(totals == ["17", "16", "7"], "totals {totals:?}");
    ensure!(lines[2..].iter().all(|l| l.matches(" | ").count() == 6), "row width");
    let loaded = Registry::load(Path::new(reg)).map_err(|e| e.to_string())?;
    ensure!(
        loaded.diagnostics.len() == 18 && loaded.sheets.len() == 3,
        "registry contents"
    );
    within(elapsed, Duration::from_secs(2)).map(|t| format!("ingest, check, 3 interactive scores, rank: {t}"))
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("rubric exhaustiveness", rubric_exhaustiveness),
        ("band table", band_table),
        ("worked template", worked_template),
        ("formulation fixtures", formulation_fixtures),
        ("corpus annotations", corpus_annotations),
        ("prompt byte fidelity", prompt_fidelity),
        ("registry round trip", round_trip),
        ("ranking oracle", ranking_oracle),
        ("parser authority", parser_authority),
        ("end-to-end CLI", end_to_end),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
