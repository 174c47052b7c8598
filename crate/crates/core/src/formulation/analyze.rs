//! Rule-based detection of action verbs, verb coordination and outcome
//! noun phrases in a single task sentence.
//!
//! The analysis is purely lexical. A word counts as an action verb when it
//! is in the lexicon and sits in one of two places:
//!
//! * clause-initial (imperative) position, after any list numbering and
//!   leading adverbs;
//! * right after a coordinator (`or`, `and`, `,`, `/`) whose left-hand
//!   partner is itself a detected action.
//!
//! Lexicon words preceded by a determiner are read as nouns. Words inside
//! parentheses are ignored.

use serde::{Deserialize, Serialize};

use super::lexicon::Lexicon;
use super::FormulationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Joiner {
    Or,
    And,
    Comma,
    Slash,
}

impl Joiner {
    pub fn as_str(&self) -> &'static str {
        match self {
            Joiner::Or => "or",
            Joiner::And => "and",
            Joiner::Comma => ",",
            Joiner::Slash => "/",
        }
    }

    /// `and` and bare comma lists add items; `or` and `/` offer alternatives.
    pub fn is_conjunctive(&self) -> bool {
        matches!(self, Joiner::And | Joiner::Comma)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateAction {
    /// Verb as written, multi-word entries joined by a single space.
    pub token: String,
    /// Character (not byte) offset of the verb in the analysed text.
    pub offset: usize,
    /// True when found in clause-initial position.
    pub leading: bool,
}

/// Two candidate actions joined by a coordinator. `left` and `right` index
/// into [`ActionAnalysis::candidate_actions`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coordination {
    pub joiner: Joiner,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeMarker {
    pub phrase: String,
    pub offset: usize,
    /// Content words in the phrase, determiners excluded.
    pub words: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionAnalysis {
    pub candidate_actions: Vec<CandidateAction>,
    pub coordinations: Vec<Coordination>,
    /// Conjuncts of the direct object of the first action.
    pub outcome_markers: Vec<OutcomeMarker>,
    /// How the outcome conjuncts are joined; `And` wins over `Or` when both
    /// appear.
    pub outcome_joiner: Option<Joiner>,
    pub token_count: usize,
}

impl ActionAnalysis {
    pub fn action_tokens(&self) -> Vec<&str> {
        self.candidate_actions.iter().map(|c| c.token.as_str()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Word,
    Punct(char),
}

#[derive(Debug, Clone)]
struct Token<'a> {
    text: &'a str,
    lower: String,
    offset: usize,
    kind: Kind,
    in_parens: bool,
}

impl Token<'_> {
    fn is_word(&self) -> bool {
        self.kind == Kind::Word
    }

    fn is_punct(&self, c: char) -> bool {
        self.kind == Kind::Punct(c)
    }

    fn ends_clause(&self) -> bool {
        matches!(self.kind, Kind::Punct(':' | ';' | '.' | '!' | '?'))
    }
}

fn is_joiner_char(c: char) -> bool {
    c == '-' || c == '\'' || c == '’'
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut depth = 0usize;
    let mut i = 0;
    while i < chars.len() {
        let (byte, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_alphanumeric() {
            let start = i;
            i += 1;
            while i < chars.len() {
                let c = chars[i].1;
                let joined = is_joiner_char(c) && chars.get(i + 1).is_some_and(|(_, n)| n.is_alphanumeric());
                if c.is_alphanumeric() || joined {
                    i += 1;
                } else {
                    break;
                }
            }
            let end = chars.get(i).map_or(text.len(), |(b, _)| *b);
            let slice = &text[byte..end];
            tokens.push(Token {
                text: slice,
                lower: slice.to_lowercase(),
                offset: start,
                kind: Kind::Word,
                in_parens: depth > 0,
            });
            continue;
        }
        if c == ')' {
            depth = depth.saturating_sub(1);
        }
        let end = byte + c.len_utf8();
        tokens.push(Token {
            text: &text[byte..end],
            lower: text[byte..end].to_owned(),
            offset: i,
            kind: Kind::Punct(c),
            in_parens: depth > 0 || c == ')',
        });
        if c == '(' {
            depth += 1;
        }
        i += 1;
    }
    tokens
}

const DETERMINERS: &[&str] = &[
    "a", "an", "the", "this", "these", "those", "its", "their", "our", "your", "my", "his", "her", "each", "every",
    "any", "some", "all", "no", "other",
];

const PREPOSITIONS: &[&str] = &[
    "for",
    "with",
    "from",
    "to",
    "in",
    "on",
    "at",
    "of",
    "by",
    "about",
    "into",
    "through",
    "during",
    "including",
    "within",
    "across",
    "under",
    "over",
    "between",
    "via",
    "per",
    "against",
    "among",
    "toward",
    "towards",
    "without",
    "upon",
    "after",
    "before",
    "as",
    "that",
    "which",
    "who",
    "whose",
    "so",
    "such",
    "if",
    "when",
    "where",
    "while",
    "until",
    "unless",
    "because",
];

const LEADING_SKIP: &[&str] = &["please", "then", "also", "first", "next", "now"];

fn is_determiner(word: &str) -> bool {
    DETERMINERS.contains(&word) || word.ends_with("'s") || word.ends_with("’s")
}

fn is_boundary_word(word: &str) -> bool {
    PREPOSITIONS.contains(&word)
}

fn is_numbering(word: &str) -> bool {
    word.chars().all(|c| c.is_ascii_digit())
        || (word.chars().count() == 1 && word.chars().all(|c| c.is_ascii_lowercase()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Frame {
    Leading,
    Infinitive,
    Other,
}

#[derive(Debug, Clone)]
struct Occurrence {
    start: usize,
    end: usize,
    clause: usize,
    frame: Frame,
}

fn coordinator_before(tokens: &[Token<'_>], idx: usize) -> Option<(Joiner, usize)> {
    let prev = idx.checked_sub(1)?;
    let t = &tokens[prev];
    let joiner = match (t.kind, t.lower.as_str()) {
        (Kind::Word, "or") => Joiner::Or,
        (Kind::Word, "and") => Joiner::And,
        (Kind::Punct(','), _) => Joiner::Comma,
        (Kind::Punct('/'), _) => Joiner::Slash,
        _ => return None,
    };
    // Step over ", or" / ", and" / "and/or" so the returned index is the
    // first token of the coordinator.
    let mut first = prev;
    while first > 0 {
        let p = &tokens[first - 1];
        if p.is_punct(',') || p.is_punct('/') || p.lower == "and" || p.lower == "or" {
            first -= 1;
        } else {
            break;
        }
    }
    Some((joiner, first))
}

/// Finds candidate actions, verb coordinations and outcome phrases.
pub fn analyze_actions(text: &str, lexicon: &Lexicon) -> Result<ActionAnalysis, FormulationError> {
    if text.trim().is_empty() {
        return Err(FormulationError::EmptyText);
    }
    let tokens = tokenize(text);

    // Clause index per token and the first content word of each clause.
    let mut clause_of = Vec::with_capacity(tokens.len());
    let mut leading_word: Vec<Option<usize>> = Vec::new();
    let mut clause = 0usize;
    let mut seeking = true;
    leading_word.push(None);
    for (i, t) in tokens.iter().enumerate() {
        clause_of.push(clause);
        if t.in_parens {
            continue;
        }
        if t.ends_clause() {
            clause += 1;
            leading_word.push(None);
            seeking = true;
            continue;
        }
        if seeking && t.is_word() {
            let skip = is_numbering(&t.lower)
                || LEADING_SKIP.contains(&t.lower.as_str())
                || (t.lower.ends_with("ly") && t.lower.chars().count() > 3);
            if !skip {
                leading_word[clause] = Some(i);
                seeking = false;
            }
        }
    }

    // Lexicon occurrences outside parentheses.
    let mut occurrences: Vec<Occurrence> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let t = &tokens[i];
        if !t.is_word() || t.in_parens {
            i += 1;
            continue;
        }
        let window: Vec<&str> = tokens[i..]
            .iter()
            .take_while(|t| t.is_word())
            .take(4)
            .map(|t| t.lower.as_str())
            .collect();
        let Some(len) = lexicon.match_at(&window) else {
            i += 1;
            continue;
        };
        let prev_word = i.checked_sub(1).map(|p| &tokens[p]).filter(|p| p.is_word());
        let nominal = prev_word.is_some_and(|p| is_determiner(&p.lower));
        if !nominal {
            let frame = if leading_word[clause_of[i]] == Some(i) {
                Frame::Leading
            } else if prev_word.is_some_and(|p| p.lower == "to") {
                Frame::Infinitive
            } else {
                Frame::Other
            };
            occurrences.push(Occurrence {
                start: i,
                end: i + len,
                clause: clause_of[i],
                frame,
            });
        }
        i += len;
    }

    // Candidate flags per occurrence, decided left to right.
    let mut is_candidate = vec![false; occurrences.len()];
    let mut links: Vec<(Joiner, usize, usize)> = Vec::new();
    for k in 0..occurrences.len() {
        let occ = &occurrences[k];
        if occ.frame == Frame::Leading {
            is_candidate[k] = true;
            continue;
        }
        if occ.frame == Frame::Infinitive {
            continue;
        }
        let Some((joiner, coord_start)) = coordinator_before(&tokens, occ.start) else {
            continue;
        };
        let partner = (0..k)
            .rev()
            .find(|&p| occurrences[p].clause == occ.clause && occurrences[p].end <= coord_start);
        let Some(p) = partner else { continue };
        let adjacent = occurrences[p].end == coord_start;
        if matches!(joiner, Joiner::Comma | Joiner::Slash) && !adjacent {
            continue;
        }
        // A distant right-hand verb must take an object or complement.
        let followed_by_word = tokens.get(occ.end).is_some_and(|t| t.is_word() && !t.in_parens);
        if !adjacent && !followed_by_word {
            continue;
        }
        if is_candidate[p] {
            is_candidate[k] = true;
            links.push((joiner, p, k));
        }
    }

    let mut index_of = vec![usize::MAX; occurrences.len()];
    let mut candidate_actions = Vec::new();
    for (k, occ) in occurrences.iter().enumerate() {
        if is_candidate[k] {
            index_of[k] = candidate_actions.len();
            let words: Vec<&str> = tokens[occ.start..occ.end].iter().map(|t| t.text).collect();
            candidate_actions.push(CandidateAction {
                token: words.join(" "),
                offset: tokens[occ.start].offset,
                leading: occ.frame == Frame::Leading,
            });
        }
    }
    let coordinations = links
        .into_iter()
        .map(|(joiner, l, r)| Coordination {
            joiner,
            left: index_of[l],
            right: index_of[r],
        })
        .collect();

    let (outcome_markers, outcome_joiner) = extract_outcome(&tokens, &occurrences, &is_candidate);

    Ok(ActionAnalysis {
        candidate_actions,
        coordinations,
        outcome_markers,
        outcome_joiner,
        token_count: tokens.iter().filter(|t| t.is_word()).count(),
    })
}

/// Reads the direct object of the first leading action: the words after the
/// verb group up to the first preposition, clause break or parenthesis.
fn extract_outcome(
    tokens: &[Token<'_>],
    occurrences: &[Occurrence],
    is_candidate: &[bool],
) -> (Vec<OutcomeMarker>, Option<Joiner>) {
    let Some(first) = occurrences.iter().position(|o| o.frame == Frame::Leading) else {
        return (Vec::new(), None);
    };
    // Skip verbs coordinated directly with the first one ("Post and update").
    let mut pos = occurrences[first].end;
    let mut k = first + 1;
    while k < occurrences.len() && is_candidate[k] {
        let between = &tokens[pos..occurrences[k].start];
        let only_joiners = !between.is_empty()
            && between
                .iter()
                .all(|t| t.is_punct(',') || t.is_punct('/') || t.lower == "and" || t.lower == "or");
        if !only_joiners {
            break;
        }
        pos = occurrences[k].end;
        k += 1;
    }
    let next_verb_start = (k..occurrences.len())
        .find(|&j| is_candidate[j])
        .map(|j| occurrences[j].start);

    // Collect conjuncts.
    let mut conjuncts: Vec<Vec<&Token<'_>>> = vec![Vec::new()];
    let mut joiner: Option<Joiner> = None;
    let note_joiner = |j: Joiner, current: &mut Option<Joiner>| {
        *current = match (*current, j) {
            (Some(Joiner::And), _) | (_, Joiner::And) => Some(Joiner::And),
            (Some(Joiner::Or), _) | (_, Joiner::Or) => Some(Joiner::Or),
            (Some(prev), _) => Some(prev),
            (None, j) => Some(j),
        };
    };
    let mut i = pos;
    while i < tokens.len() {
        if Some(i) == next_verb_start {
            break;
        }
        let t = &tokens[i];
        if t.in_parens || t.is_punct('(') || t.ends_clause() {
            break;
        }
        match t.kind {
            Kind::Word if is_boundary_word(&t.lower) => break,
            Kind::Word if t.lower == "and" || t.lower == "or" => {
                // A coordinator that introduces the next verb ends the object.
                if tokens
                    .get(i + 1)
                    .is_some_and(|n| Some(i + 1) == next_verb_start || is_boundary_word(&n.lower))
                {
                    break;
                }
                note_joiner(if t.lower == "and" { Joiner::And } else { Joiner::Or }, &mut joiner);
                conjuncts.push(Vec::new());
            }
            Kind::Word => conjuncts.last_mut().expect("non-empty").push(t),
            Kind::Punct(',') => {
                let next = tokens.get(i + 1);
                // A participle after a comma starts a new clause ("..., working with").
                let continues =
                    next.is_some_and(|n| n.is_word() && !is_boundary_word(&n.lower) && !n.lower.ends_with("ing"));
                if !continues {
                    break;
                }
                if !next.is_some_and(|n| n.lower == "and" || n.lower == "or") {
                    note_joiner(Joiner::Comma, &mut joiner);
                    conjuncts.push(Vec::new());
                }
            }
            Kind::Punct('/') => {
                note_joiner(Joiner::Slash, &mut joiner);
                conjuncts.push(Vec::new());
            }
            Kind::Punct(_) => break,
        }
        i += 1;
    }

    let markers: Vec<OutcomeMarker> = conjuncts
        .into_iter()
        .filter(|c| !c.is_empty())
        .map(|c| OutcomeMarker {
            phrase: c.iter().map(|t| t.text).collect::<Vec<_>>().join(" "),
            offset: c[0].offset,
            words: c.iter().filter(|t| !is_determiner(&t.lower)).count(),
        })
        .filter(|m| m.words > 0)
        .collect();
    let joiner = if markers.len() > 1 { joiner } else { None };
    (markers, joiner)
}
