//! Random registries built through the public ingest, check, score,
//! decomposition and template operations.

use std::path::PathBuf;

use chrono::NaiveDate;
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::Rng;

use cm_core::formulation::{check_unit_of_work, register_decomposition, Lexicon};
use cm_core::index::make_score_sheet;
use cm_core::ingest::ingest_text;
use cm_core::registry::Registry;
use cm_core::spec_template::{skeleton, FieldValue, TemplateField};

const PREFIXES: &[&str] = &["T", "ops", "a/b", ".dot", "Ünï", "x y", "100%", "q?", "CON"];
const VERBS: &[&str] = &[
    "Draft",
    "Book",
    "Review",
    "Plan or direct",
    "Ship",
    "Confer with",
    "Écrire",
    "Post and update",
];
const OBJECTS: &[&str] = &[
    "the schedule",
    "venues, booths, and travel",
    "press releases for \"clients\"",
    "budget and deadline adherence",
    "the 2024 report",
    "café menus",
    "reports\\drafts",
];
const TAILS: &[&str] = &[
    "",
    " this year",
    " with production managers",
    " for trade shows.",
    " 🚀",
];

fn sentence(rng: &mut StdRng) -> String {
    format!(
        "{} {}{}",
        VERBS.choose(rng).unwrap(),
        OBJECTS.choose(rng).unwrap(),
        TAILS.choose(rng).unwrap()
    )
}

fn ingest_block(rng: &mut StdRng) -> String {
    let mut text = String::new();
    for _ in 0..rng.random_range(0..8) {
        match rng.random_range(0..6) {
            0 => text.push('\n'),
            1 => text.push_str(&format!("- {}\n", sentence(rng))),
            2 => text.push_str(&format!("{}. {}\n", rng.random_range(1..20), sentence(rng))),
            _ => text.push_str(&format!("{}\n", sentence(rng))),
        }
    }
    text
}

fn levels(rng: &mut StdRng) -> [u8; 5] {
    std::array::from_fn(|_| rng.random_range(0..=4))
}

/// Builds a registry rooted at `root` from a random sequence of operations.
pub fn random_registry(rng: &mut StdRng, root: PathBuf, lexicon: &Lexicon) -> Registry {
    let mut reg = Registry::new(root);
    for _ in 0..rng.random_range(0..4) {
        let prefix = PREFIXES.choose(rng).unwrap();
        let (tasks, _) = ingest_text(ingest_block(rng).as_bytes(), prefix, "fuzz").unwrap();
        for t in tasks {
            reg.upsert_task(t);
        }
    }
    let ids: Vec<String> = reg.tasks.keys().cloned().collect();
    for id in &ids {
        let task = reg.tasks[id].clone();
        if rng.random_bool(0.5) {
            reg.diagnostics
                .insert(id.clone(), check_unit_of_work(&task, lexicon).unwrap());
        }
        if rng.random_bool(0.5) {
            let mut sheet = make_score_sheet(id.clone(), levels(rng)).unwrap();
            if rng.random_bool(0.3) {
                sheet.assessor = Some("llm".into());
                sheet.notes = Some(format!("note for {id}: \"quoted\"\nsecond line"));
            }
            reg.sheets.insert(id.clone(), sheet);
        }
        if rng.random_bool(0.3) {
            let date = NaiveDate::from_ymd_opt(2024, rng.random_range(1..=12), rng.random_range(1..=28)).unwrap();
            let mut t = skeleton(&task, date);
            for field in TemplateField::ALL.into_iter().skip(1) {
                if rng.random_bool(0.5) {
                    let value = if field.is_list() {
                        FieldValue::List((0..rng.random_range(0..4)).map(|_| sentence(rng)).collect())
                    } else {
                        FieldValue::Text(sentence(rng))
                    };
                    t.set_raw(field, value);
                }
            }
            reg.templates.insert(t.unique_id.clone(), t);
        }
    }
    if let Some(parent_id) = ids.choose(rng) {
        if rng.random_bool(0.4) {
            let parent = reg.tasks[parent_id].clone();
            let mut children: Vec<String> = (0..rng.random_range(1..5)).map(|_| sentence(rng)).collect();
            children.sort();
            children.dedup();
            let record = register_decomposition(&parent, &children, lexicon).unwrap();
            if record.children.iter().all(|c| !reg.tasks.contains_key(&c.id)) {
                for (c, d) in record.children.iter().zip(&record.child_diagnostics) {
                    reg.upsert_task(c.clone());
                    reg.diagnostics.insert(c.id.clone(), d.clone());
                }
                reg.decompositions.push(record);
            }
        }
    }
    reg
}
