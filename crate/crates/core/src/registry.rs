//! File-backed store for tasks, diagnostics, score sheets, templates and
//! decompositions.
//!
//! Layout under the root directory:
//!
//! ```text
//! meta.json
//! tasks/<id>.json
//! diagnostics/<task id>.json
//! sheets/<task id>.json
//! templates/<unique id>.json
//! decompositions/00001.json
//! ```
//!
//! Ids are percent-encoded in file names. Every document is written to a
//! temporary file and renamed into place. Writers hold `.lock`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::formulation::{DecompositionRecord, FormulationDiagnostics};
use crate::index::AutomationScoreSheet;
use crate::model::TaskDescription;
use crate::spec_template::TaskSpecTemplate;

const FILE_NAME: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'_').remove(b'.');
const LOCK_FILE: &str = ".lock";
const META_FILE: &str = "meta.json";
const TASKS: &str = "tasks";
const DIAGNOSTICS: &str = "diagnostics";
const SHEETS: &str = "sheets";
const TEMPLATES: &str = "templates";
const DECOMPOSITIONS: &str = "decompositions";

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corrupt document {}: {reason}", .path.display())]
    Corrupt { path: PathBuf, reason: String },
    #[error("integrity violation: {0}")]
    Integrity(String),
    #[error("registry {} is locked by another writer (remove {} if no writer is running)", .root.display(), .root.join(LOCK_FILE).display())]
    Locked { root: PathBuf },
    #[error("cannot store {kind} with invalid key {key:?}: {reason}")]
    InvalidKey {
        kind: &'static str,
        key: String,
        reason: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RegistryError + '_ {
    move |source| RegistryError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Exclusive write access to a registry directory, released on drop.
#[derive(Debug)]
pub struct RegistryLock {
    path: PathBuf,
}

impl RegistryLock {
    pub fn acquire(root: &Path) -> Result<Self, RegistryError> {
        fs::create_dir_all(root).map_err(io_err(root))?;
        let path = root.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(RegistryLock { path })
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(RegistryError::Locked { root: root.to_owned() }),
            Err(e) => Err(io_err(&path)(e)),
        }
    }

    fn root(&self) -> &Path {
        self.path.parent().expect("lock file has a parent")
    }
}

impl Drop for RegistryLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Registry {
    pub root: PathBuf,
    pub tasks: BTreeMap<String, TaskDescription>,
    pub diagnostics: BTreeMap<String, FormulationDiagnostics>,
    pub sheets: BTreeMap<String, AutomationScoreSheet>,
    pub templates: BTreeMap<String, TaskSpecTemplate>,
    pub decompositions: Vec<DecompositionRecord>,
}

/// Compares ids so that embedded numbers sort numerically ("T-2" before
/// "T-10").
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut x, mut y) = (a, b);
    loop {
        match (x.chars().next(), y.chars().next()) {
            (None, None) => return a.cmp(b),
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(c), Some(d)) if c.is_ascii_digit() && d.is_ascii_digit() => {
                let nx = x.bytes().take_while(u8::is_ascii_digit).count();
                let ny = y.bytes().take_while(u8::is_ascii_digit).count();
                let (dx, dy) = (x[..nx].trim_start_matches('0'), y[..ny].trim_start_matches('0'));
                let ord = dx.len().cmp(&dy.len()).then_with(|| dx.cmp(dy));
                if ord != Ordering::Equal {
                    return ord;
                }
                x = &x[nx..];
                y = &y[ny..];
            }
            (Some(c), Some(d)) => {
                if c != d {
                    return c.cmp(&d);
                }
                x = &x[c.len_utf8()..];
                y = &y[d.len_utf8()..];
            }
        }
    }
}

/// Percent-encodes `key` for use as a file name. A leading dot is encoded
/// too so the file is not hidden.
fn encode(key: &str) -> String {
    let encoded = utf8_percent_encode(key, FILE_NAME).to_string();
    match encoded.strip_prefix('.') {
        Some(rest) => format!("%2E{rest}"),
        None => encoded,
    }
}

fn decode(stem: &str) -> Option<String> {
    percent_decode_str(stem).decode_utf8().ok().map(|s| s.into_owned())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RegistryError> {
    let dir = path.parent().expect("document path has a parent");
    let mut tmp = tempfile::Builder::new()
        .prefix(".tmp-")
        .tempfile_in(dir)
        .map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| io_err(path)(e.error))?;
    Ok(())
}

fn to_document<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("registry types serialize");
    s.push('\n');
    s.into_bytes()
}

/// Writes one document per entry and removes any other `.json` files left
/// in the directory.
fn write_dir<'a, T: Serialize + 'a>(
    dir: &Path,
    docs: impl Iterator<Item = (String, &'a T)>,
) -> Result<(), RegistryError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut keep = BTreeSet::new();
    for (name, value) in docs {
        let path = dir.join(&name);
        write_atomic(&path, &to_document(value))?;
        keep.insert(name);
    }
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with(".json") && !keep.contains(&name) {
            fs::remove_file(entry.path()).map_err(io_err(&entry.path()))?;
        }
    }
    Ok(())
}

/// Documents in `dir`, sorted by file name. A missing directory is empty.
fn read_dir<T: DeserializeOwned>(dir: &Path) -> Result<Vec<(PathBuf, T)>, RegistryError> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.ends_with(".json") && !name.starts_with('.') {
            paths.push(path);
        }
    }
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            let value = serde_json::from_str(&text).map_err(|e| RegistryError::Corrupt {
                path: path.clone(),
                reason: e.to_string(),
            })?;
            Ok((path, value))
        })
        .collect()
}

fn keyed<T>(docs: Vec<(PathBuf, T)>, key: impl Fn(&T) -> &str) -> Result<BTreeMap<String, T>, RegistryError> {
    let mut map = BTreeMap::new();
    for (path, doc) in docs {
        let k = key(&doc).to_owned();
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
        if decode(stem).as_deref() != Some(k.as_str()) {
            return Err(RegistryError::Corrupt {
                path,
                reason: format!("file name does not match id {k:?}"),
            });
        }
        map.insert(k, doc);
    }
    Ok(map)
}

fn check_keys<T>(kind: &'static str, map: &BTreeMap<String, T>, id: impl Fn(&T) -> &str) -> Result<(), RegistryError> {
    match map.iter().find(|(k, v)| k.as_str() != id(v)) {
        Some((k, v)) => Err(RegistryError::InvalidKey {
            kind,
            key: k.clone(),
            reason: format!("stored under a key that differs from its id {:?}", id(v)),
        }),
        None => Ok(()),
    }
}

impl Registry {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Registry {
            root: root.into(),
            ..Registry::default()
        }
    }

    /// Loads `root`, or returns an empty registry if it does not exist yet.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, RegistryError> {
        let root = root.into();
        if root.exists() {
            Self::load(&root)
        } else {
            Ok(Self::new(root))
        }
    }

    pub fn load(root: &Path) -> Result<Self, RegistryError> {
        fs::metadata(root).map_err(io_err(root))?;
        let registry = Registry {
            root: root.to_owned(),
            tasks: keyed(read_dir(&root.join(TASKS))?, |t: &TaskDescription| &t.id)?,
            diagnostics: keyed(read_dir(&root.join(DIAGNOSTICS))?, |d: &FormulationDiagnostics| {
                &d.task_id
            })?,
            sheets: keyed(read_dir(&root.join(SHEETS))?, |s: &AutomationScoreSheet| &s.task_id)?,
            templates: keyed(read_dir(&root.join(TEMPLATES))?, |t: &TaskSpecTemplate| &t.unique_id)?,
            decompositions: read_dir(&root.join(DECOMPOSITIONS))?
                .into_iter()
                .map(|(_, d)| d)
                .collect(),
        };
        registry.check_integrity()?;
        Ok(registry)
    }

    /// Every diagnostics entry, sheet and decomposition parent must name a
    /// stored task.
    pub fn check_integrity(&self) -> Result<(), RegistryError> {
        let missing = |what: &str, id: &str| {
            RegistryError::Integrity(format!("{what} refers to task {id:?}, which is not stored"))
        };
        if let Some(id) = self.diagnostics.keys().find(|k| !self.tasks.contains_key(*k)) {
            return Err(missing("diagnostics", id));
        }
        if let Some(id) = self.sheets.keys().find(|k| !self.tasks.contains_key(*k)) {
            return Err(missing("score sheet", id));
        }
        if let Some(d) = self
            .decompositions
            .iter()
            .find(|d| !self.tasks.contains_key(&d.parent_id))
        {
            return Err(missing("decomposition", &d.parent_id));
        }
        for (id, t) in &self.tasks {
            if let Some(p) = &t.parent_id {
                if !self.tasks.contains_key(p) {
                    return Err(RegistryError::Integrity(format!(
                        "task {id:?} has parent {p:?}, which is not stored"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Saves under a freshly taken write lock.
    pub fn save(&self) -> Result<(), RegistryError> {
        let lock = RegistryLock::acquire(&self.root)?;
        self.save_locked(&lock)
    }

    /// Saves while the caller holds `lock` for this registry's root.
    pub fn save_locked(&self, lock: &RegistryLock) -> Result<(), RegistryError> {
        if lock.root() != self.root {
            return Err(RegistryError::Integrity(format!(
                "lock for {} used to save {}",
                lock.root().display(),
                self.root.display()
            )));
        }
        self.check_integrity()?;
        check_keys("task", &self.tasks, |t| &t.id)?;
        check_keys("diagnostics", &self.diagnostics, |d| &d.task_id)?;
        check_keys("sheet", &self.sheets, |s| &s.task_id)?;
        check_keys("template", &self.templates, |t| &t.unique_id)?;
        for (k, t) in &self.templates {
            if let Err(e) = t.typed_unique_id() {
                return Err(RegistryError::InvalidKey {
                    kind: "template",
                    key: k.clone(),
                    reason: e.to_string(),
                });
            }
        }

        let doc = |k: &String| format!("{}.json", encode(k));
        write_dir(&self.root.join(TASKS), self.tasks.iter().map(|(k, v)| (doc(k), v)))?;
        write_dir(
            &self.root.join(DIAGNOSTICS),
            self.diagnostics.iter().map(|(k, v)| (doc(k), v)),
        )?;
        write_dir(&self.root.join(SHEETS), self.sheets.iter().map(|(k, v)| (doc(k), v)))?;
        write_dir(
            &self.root.join(TEMPLATES),
            self.templates.iter().map(|(k, v)| (doc(k), v)),
        )?;
        write_dir(
            &self.root.join(DECOMPOSITIONS),
            self.decompositions
                .iter()
                .enumerate()
                .map(|(i, d)| (format!("{:05}.json", i + 1), d)),
        )?;
        let meta = serde_json::json!({
            "format": 1,
            "updated_at": Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
        });
        write_atomic(&self.root.join(META_FILE), &to_document(&meta))?;
        Ok(())
    }

    /// Tasks with ids in natural order.
    pub fn tasks_in_order(&self) -> Vec<&TaskDescription> {
        let mut v: Vec<_> = self.tasks.values().collect();
        v.sort_by(|a, b| natural_cmp(&a.id, &b.id));
        v
    }

    /// Adds or replaces a task.
    pub fn upsert_task(&mut self, task: TaskDescription) {
        self.tasks.insert(task.id.clone(), task);
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
            && self.diagnostics.is_empty()
            && self.sheets.is_empty()
            && self.templates.is_empty()
            && self.decompositions.is_empty()
    }
}
