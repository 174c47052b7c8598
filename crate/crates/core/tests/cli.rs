mod common;

use std::fs;
use std::path::Path;

use cm_core::cli::{EXIT_DOMAIN, EXIT_OK, EXIT_USAGE};
use cm_core::registry::{Registry, RegistryLock};
use common::{fixture, ok_reply, read_test_fixture, run_cli, StubServer};

fn reg_arg(dir: &Path) -> String {
    dir.join("reg").display().to_string()
}

fn ingest_corpus(reg: &str) {
    let corpus = fixture("onet_corporate_communications.txt");
    let (code, _, err) = run_cli(&["--registry", reg, "ingest", "text", corpus.to_str().unwrap()], "");
    assert_eq!(code, EXIT_OK, "{err}");
}

#[test]
fn score_from_levels() {
    let (code, out, _) = run_cli(&["index", "score", "--levels", "3,2,4,1,2", "--task-id", "T1"], "");
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("total: 12\n"));
    assert!(out.contains("band: Suitable for Automation\n"));
}

#[test]
fn out_of_range_level_is_a_domain_error() {
    let (code, out, err) = run_cli(&["index", "score", "--levels", "5,0,0,0,0"], "");
    assert_eq!(code, EXIT_DOMAIN);
    assert!(out.is_empty());
    assert!(err.contains("standardized_input"), "{err}");
}

#[test]
fn wrong_level_count_is_a_domain_error() {
    let (code, _, err) = run_cli(&["index", "score", "--levels", "1,2,3"], "");
    assert_eq!(code, EXIT_DOMAIN);
    assert!(err.contains("expected 5 condition levels, got 3"));
}

#[test]
fn usage_errors_name_the_flag_and_synopsis() {
    let (code, _, err) = run_cli(&["index", "score", "--levels", "3,x,1,1,1"], "");
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("--levels"), "{err}");
    assert!(err.contains("Usage: cm index score"), "{err}");

    let (code, _, err) = run_cli(&["index", "score", "--bogus"], "");
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("--bogus"));

    let (code, _, err) = run_cli(&["spec", "set", "--id", "X", "--field", "colour", "--value", "x"], "");
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("colour") && err.contains("Usage: cm spec set"), "{err}");

    let (code, _, err) = run_cli(
        &["prompt", "emit", "--kind", "formulation", "--text", "a", "--text", "b"],
        "",
    );
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("Usage: cm prompt emit"), "{err}");

    let (code, out, _) = run_cli(&["--help"], "");
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("formulate"));
}

#[test]
fn formulation_check_on_text() {
    let (code, out, _) = run_cli(
        &[
            "formulate",
            "check",
            "--text",
            "Draft the schedule for trade shows this year",
        ],
        "",
    );
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("verdict: pass\n"));

    let text = "Coordinate or participate in promotional activities or trade shows, working with developers, advertisers, or production managers, to market products or services";
    let (code, out, _) = run_cli(&["formulate", "check", "--text", text], "");
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("verdict: fail\n"));
    assert!(out.contains("single_action: fail\n"));
}

#[test]
fn ingest_check_and_record() {
    let dir = tempfile::tempdir().unwrap();
    let reg = reg_arg(dir.path());
    ingest_corpus(&reg);
    let (code, out, err) = run_cli(
        &[
            "--registry",
            &reg,
            "--format",
            "csv",
            "formulate",
            "check",
            "--all",
            "--record",
        ],
        "",
    );
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(out.lines().count(), 19);
    assert!(out.starts_with("Task,Text,Verdict,"));
    assert!(err.contains("18 checked"));
    let loaded = Registry::load(Path::new(&reg)).unwrap();
    assert_eq!(loaded.diagnostics.len(), 18);

    // Re-ingesting the same file adds nothing; a clashing file is refused.
    ingest_corpus(&reg);
    let other = dir.path().join("other.txt");
    fs::write(&other, "Something else entirely\n").unwrap();
    let (code, _, err) = run_cli(&["--registry", &reg, "ingest", "text", other.to_str().unwrap()], "");
    assert_eq!(code, EXIT_DOMAIN);
    assert!(err.contains("--prefix"));
    let (code, _, _) = run_cli(
        &[
            "--registry",
            &reg,
            "ingest",
            "text",
            other.to_str().unwrap(),
            "--prefix",
            "X",
        ],
        "",
    );
    assert_eq!(code, EXIT_OK);
    assert_eq!(Registry::load(Path::new(&reg)).unwrap().tasks.len(), 19);
}

#[test]
fn ingest_csv_from_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let reg = reg_arg(dir.path());
    let csv = "id,task\nA,Plan events\nB,\nC,\"Book venues, booths\"\n";
    let (code, out, err) = run_cli(
        &[
            "--registry",
            &reg,
            "--format",
            "plain",
            "ingest",
            "csv",
            "-",
            "--text-column",
            "task",
            "--id-column",
            "id",
        ],
        csv,
    );
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("C     Book venues, booths"), "{out}");
    assert!(err.contains("record 2: empty task text"));
    assert!(err.contains("2 accepted, 1 rejected"));

    let (code, _, err) = run_cli(
        &["--registry", &reg, "ingest", "csv", "-", "--text-column", "nope"],
        csv,
    );
    assert_eq!(code, EXIT_DOMAIN);
    assert!(err.contains("\"nope\""));
}

#[test]
fn interactive_scoring_reprompts_and_aborts_on_eof() {
    let dir = tempfile::tempdir().unwrap();
    let reg = reg_arg(dir.path());
    ingest_corpus(&reg);
    let (code, out, err) = run_cli(
        &[
            "--registry",
            &reg,
            "index",
            "score",
            "--task-id",
            "T-3",
            "--interactive",
            "--record",
        ],
        "4\n3\n7\nthree\n4\n2\n3\n",
    );
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(err.matches("enter a whole number from 0 to 4").count(), 2);
    assert!(out.contains("Task T-3: Post and update content"));
    assert!(out.contains(
        "  4: Input format is predefined specifying the order and naming of fields with consistent data types\n"
    ));
    assert!(out.contains("total: 16\nband: Highly Suitable for Automation\n"));
    let sheet = &Registry::load(Path::new(&reg)).unwrap().sheets["T-3"];
    assert_eq!(sheet.levels(), [4, 3, 4, 2, 3]);

    let (code, _, err) = run_cli(
        &[
            "--registry",
            &reg,
            "index",
            "score",
            "--task-id",
            "T-4",
            "--interactive",
        ],
        "1\n",
    );
    assert_eq!(code, EXIT_DOMAIN);
    assert!(err.contains("well_defined_rules"));
}

#[test]
fn record_needs_a_stored_task() {
    let dir = tempfile::tempdir().unwrap();
    let reg = reg_arg(dir.path());
    let (code, _, err) = run_cli(
        &[
            "--registry",
            &reg,
            "index",
            "score",
            "--task-id",
            "T-1",
            "--levels",
            "1,1,1,1,1",
            "--record",
        ],
        "",
    );
    assert_eq!(code, EXIT_DOMAIN);
    assert!(err.contains("no stored task"));
}

#[test]
fn rank_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let reg = reg_arg(dir.path());
    ingest_corpus(&reg);
    for (id, levels) in [
        ("T-1", "1,1,1,1,1"),
        ("T-2", "4,4,4,4,4"),
        ("T-10", "1,1,1,1,1"),
        ("T-9", "2,2,2,2,2"),
    ] {
        let (code, _, _) = run_cli(
            &[
                "--registry",
                &reg,
                "index",
                "score",
                "--task-id",
                id,
                "--levels",
                levels,
                "--record",
            ],
            "",
        );
        assert_eq!(code, EXIT_OK);
    }
    let (_, first, _) = run_cli(&["--registry", &reg, "index", "rank"], "");
    let (_, second, _) = run_cli(&["--registry", &reg, "index", "rank"], "");
    assert_eq!(first, second);
    let tasks: Vec<&str> = first.lines().skip(2).map(|l| l.split(" | ").next().unwrap()).collect();
    assert!(tasks[0].starts_with("| Plan or direct"));
    assert!(tasks[1].starts_with("| Prepare or edit"));
    // Equal totals keep registry order: T-1 before T-10.
    assert!(tasks[2].starts_with("| Respond to requests"));
    assert!(tasks[3].starts_with("| Arrange public appearances"));

    let (code, out, _) = run_cli(
        &[
            "--registry",
            &reg,
            "--format",
            "csv",
            "index",
            "rank",
            "--task-id",
            "T-9",
        ],
        "",
    );
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 2);
    let (code, _, err) = run_cli(&["--registry", &reg, "index", "rank", "--task-id", "T-5"], "");
    assert_eq!(code, EXIT_DOMAIN);
    assert!(err.contains("no score sheet"));
}

#[test]
fn statements_table_has_25_rows() {
    let (code, out, _) = run_cli(&["--format", "csv", "index", "statements"], "");
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 26);
}

#[test]
fn read_only_commands_work_while_locked() {
    let dir = tempfile::tempdir().unwrap();
    let reg = reg_arg(dir.path());
    ingest_corpus(&reg);
    let _lock = RegistryLock::acquire(Path::new(&reg)).unwrap();
    let (code, _, _) = run_cli(&["--registry", &reg, "index", "rank"], "");
    assert_eq!(code, EXIT_OK);
    let (code, _, _) = run_cli(&["--registry", &reg, "registry", "load"], "");
    assert_eq!(code, EXIT_OK);
    let (code, _, err) = run_cli(&["--registry", &reg, "formulate", "check", "--all", "--record"], "");
    assert_eq!(code, EXIT_DOMAIN);
    assert!(err.contains("locked"));
}

#[test]
fn spec_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let reg = reg_arg(dir.path());
    let worked = fixture("cpapm_template.json");
    let worked = worked.to_str().unwrap();

    let (code, out, _) = run_cli(&["spec", "check", "--file", worked, "--as-of", "2024-02-01"], "");
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("template: CPAPM-20240201\ndeadline: 04/15/2024\nfilled: 16/16\n"));
    assert!(out.ends_with("ok: yes\n"));

    let (code, _, _) = run_cli(&["--registry", &reg, "spec", "new", "--file", worked], "");
    assert_eq!(code, EXIT_OK);
    let (code, _, err) = run_cli(&["--registry", &reg, "spec", "new", "--file", worked], "");
    assert_eq!(code, EXIT_DOMAIN);
    assert!(err.contains("--force"));

    let (code, out, _) = run_cli(
        &[
            "--registry",
            &reg,
            "spec",
            "set",
            "--id",
            "CPAPM-20240201",
            "--field",
            "Status options",
            "--value",
            "Completed",
            "--value",
            "Pending",
        ],
        "",
    );
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("set: status_options"));
    let (code, _, err) = run_cli(
        &[
            "--registry",
            &reg,
            "spec",
            "set",
            "--id",
            "CPAPM-20240201",
            "--field",
            "deadline",
            "--value",
            "02/30/2024",
        ],
        "",
    );
    assert_eq!(code, EXIT_DOMAIN);
    assert!(err.contains("deadline"), "{err}");

    let (code, out, _) = run_cli(
        &[
            "--registry",
            &reg,
            "spec",
            "report",
            "--id",
            "CPAPM-20240201",
            "--as-of",
            "2024-02-01",
        ],
        "",
    );
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("Unique ID: CPAPM-20240201"));

    let (code, _, _) = run_cli(
        &[
            "--registry",
            &reg,
            "spec",
            "set",
            "--id",
            "CPAPM-20240201",
            "--field",
            "unique_id",
            "--value",
            "CPAPM-20240301",
        ],
        "",
    );
    assert_eq!(code, EXIT_OK);
    let loaded = Registry::load(Path::new(&reg)).unwrap();
    assert_eq!(loaded.templates.keys().collect::<Vec<_>>(), ["CPAPM-20240301"]);
}

#[test]
fn skeleton_template_is_a_draft() {
    let dir = tempfile::tempdir().unwrap();
    let reg = reg_arg(dir.path());
    ingest_corpus(&reg);
    let (code, out, _) = run_cli(
        &[
            "--registry",
            &reg,
            "spec",
            "new",
            "--task-id",
            "T-4",
            "--date",
            "2024-03-01",
        ],
        "",
    );
    assert_eq!(code, EXIT_OK);
    let uid = out
        .lines()
        .next()
        .unwrap()
        .strip_prefix("template: ")
        .unwrap()
        .to_owned();
    assert!(uid.ends_with("-20240301"));
    let (code, _, err) = run_cli(&["--registry", &reg, "spec", "report", "--id", &uid], "");
    assert_eq!(code, EXIT_DOMAIN);
    assert!(err.contains("action"), "{err}");
    let (code, out, _) = run_cli(&["--registry", &reg, "spec", "check", "--id", &uid], "");
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("warning action: not filled"), "{out}");
}

#[test]
fn prompt_emit_blank_matches_fixture() {
    for (kind, name) in [
        ("formulation", "prompt_formulation.txt"),
        ("index_assessment", "prompt_index_assessment.txt"),
        ("template_completion", "prompt_template_completion.txt"),
    ] {
        let (code, out, _) = run_cli(&["prompt", "emit", "--kind", kind, "--blank", "--verbatim"], "");
        assert_eq!(code, EXIT_OK);
        assert_eq!(out, read_test_fixture(name), "{kind}");
    }
}

#[test]
fn llm_parse_records_sheets_with_discrepancy_notes() {
    let dir = tempfile::tempdir().unwrap();
    let reg = reg_arg(dir.path());
    ingest_corpus(&reg);
    let answer = common::test_fixture("completion_scores_discrepancy.txt");
    let (code, out, err) = run_cli(
        &[
            "--registry",
            &reg,
            "llm",
            "parse",
            "--kind",
            "index",
            "--input",
            answer.to_str().unwrap(),
            "--task-id",
            "T-4",
            "--task-id",
            "T-7",
            "--task-id",
            "T-15",
            "--record",
        ],
        "",
    );
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("| Task 1 | 3 | 3 | 2 | 3 | 3 | 14 |"));
    assert!(err.contains("Task 1: stated total 15 differs"));
    let loaded = Registry::load(Path::new(&reg)).unwrap();
    assert_eq!(loaded.sheets["T-4"].total(), 14);
    assert_eq!(loaded.sheets["T-15"].total(), 5);
    assert_eq!(loaded.sheets["T-4"].assessor.as_deref(), Some("llm"));
    assert!(loaded.sheets["T-4"]
        .notes
        .as_deref()
        .unwrap()
        .contains("the sum is used"));
}

#[test]
fn llm_run_against_stub_records_decomposition() {
    let dir = tempfile::tempdir().unwrap();
    let reg = reg_arg(dir.path());
    ingest_corpus(&reg);
    let server = StubServer::start(vec![ok_reply(&read_test_fixture("completion_trade_show_tasks.txt"))]);
    std::env::set_var("CM_TEST_CLI_TOKEN", "sk-cli-secret");
    let config = dir.path().join("llm.toml");
    fs::write(
        &config,
        format!(
            "endpoint = \"{}\"\ntoken_env = \"CM_TEST_CLI_TOKEN\"\ntimeout_secs = 5\n",
            server.url
        ),
    )
    .unwrap();
    let (code, out, err) = run_cli(
        &[
            "--registry",
            &reg,
            "--format",
            "csv",
            "llm",
            "run",
            "--kind",
            "formulation",
            "--task-id",
            "T-13",
            "--config",
            config.to_str().unwrap(),
            "--record",
        ],
        "",
    );
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(out.lines().count(), 17);
    assert!(err.contains("stored decomposition of T-13"));
    let loaded = Registry::load(Path::new(&reg)).unwrap();
    assert_eq!(loaded.decompositions.len(), 1);
    assert_eq!(loaded.tasks["T-13.16"].text, "Oversee deadline adherence.");
    let body: serde_json::Value = serde_json::from_str(&server.requests()[0].body).unwrap();
    assert!(body["prompt"]
        .as_str()
        .unwrap()
        .contains("Confer with production or support personnel"));
    server.join();
}

#[test]
fn llm_run_without_credentials_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("llm.toml");
    fs::write(
        &config,
        "endpoint = \"http://127.0.0.1:9/x\"\ntoken_env = \"CM_TEST_CLI_UNSET\"\n",
    )
    .unwrap();
    let (code, _, err) = run_cli(
        &[
            "llm",
            "run",
            "--kind",
            "formulation",
            "--text",
            "Plan events",
            "--config",
            config.to_str().unwrap(),
        ],
        "",
    );
    assert_eq!(code, EXIT_DOMAIN);
    assert!(err.contains("CM_TEST_CLI_UNSET"));
}

#[test]
fn decompose_from_children_file() {
    let dir = tempfile::tempdir().unwrap();
    let reg = reg_arg(dir.path());
    ingest_corpus(&reg);
    let children = fixture("trade_show_children.txt");
    let (code, _, err) = run_cli(
        &[
            "--registry",
            &reg,
            "formulate",
            "decompose",
            "--task-id",
            "T-10",
            "--children-file",
            children.to_str().unwrap(),
        ],
        "",
    );
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(err.contains("accepted: yes"));
    let (code, _, err) = run_cli(
        &[
            "--registry",
            &reg,
            "formulate",
            "decompose",
            "--task-id",
            "T-10",
            "--child",
            "Book venues",
        ],
        "",
    );
    assert_eq!(code, EXIT_DOMAIN);
    assert!(err.contains("already has a recorded decomposition"));
    let (code, out, _) = run_cli(&["--registry", &reg, "registry", "load"], "");
    assert_eq!(code, EXIT_OK);
    assert!(
        out.contains("tasks: 34\n") && out.contains("decompositions: 1\n"),
        "{out}"
    );
}

#[test]
fn registry_save_copies() {
    let dir = tempfile::tempdir().unwrap();
    let reg = reg_arg(dir.path());
    ingest_corpus(&reg);
    let copy = dir.path().join("copy");
    let (code, _, _) = run_cli(
        &["--registry", &reg, "registry", "save", "--to", copy.to_str().unwrap()],
        "",
    );
    assert_eq!(code, EXIT_OK);
    let a = Registry::load(Path::new(&reg)).unwrap();
    let mut b = Registry::load(&copy).unwrap();
    b.root = a.root.clone();
    assert_eq!(a, b);
}
