use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use super::FormulationError;

const BUNDLED: &str = include_str!("../../lexicon/default.txt");

/// A set of action verbs and short verb phrases, matched case-insensitively
/// against whole words.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lexicon {
    /// First word -> every entry starting with it, longest first.
    entries: HashMap<String, Vec<Vec<String>>>,
    len: usize,
}

impl Lexicon {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED)
    }

    /// One entry per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Self {
        let mut lexicon = Lexicon::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            lexicon.insert(line);
        }
        lexicon
    }

    pub fn from_file(path: &Path) -> Result<Self, FormulationError> {
        let text = std::fs::read_to_string(path).map_err(|e| FormulationError::Lexicon {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Ok(Self::parse(&text))
    }

    pub fn insert(&mut self, entry: &str) {
        let words: Vec<String> = entry.split_whitespace().map(str::to_lowercase).collect();
        let Some(first) = words.first().cloned() else {
            return;
        };
        let bucket = self.entries.entry(first).or_default();
        if bucket.contains(&words) {
            return;
        }
        bucket.push(words);
        bucket.sort_by_key(|w| std::cmp::Reverse(w.len()));
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, entry: &str) -> bool {
        let words: Vec<String> = entry.split_whitespace().map(str::to_lowercase).collect();
        words
            .first()
            .and_then(|w| self.entries.get(w))
            .is_some_and(|bucket| bucket.contains(&words))
    }

    /// Number of words matched by the longest entry starting at `words[0]`.
    /// `words` must already be lowercase.
    pub fn match_at(&self, words: &[&str]) -> Option<usize> {
        let bucket = self.entries.get(*words.first()?)?;
        bucket
            .iter()
            .find(|entry| entry.len() <= words.len() && entry.iter().zip(words).all(|(a, b)| a == b))
            .map(Vec::len)
    }

    /// Entries in sorted order, one per line.
    pub fn entries(&self) -> BTreeSet<String> {
        self.entries.values().flatten().map(|words| words.join(" ")).collect()
    }
}
