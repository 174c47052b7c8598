//! Task Automation Index: five conditions scored 0-4, a 0-20 total, five
//! interpretation bands and the seven-column ranking table.

mod ranking;
mod statements;

pub use ranking::{rank, RankingRow, RankingTable, RANKING_HEADER};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_POINTS: u8 = 4;
pub const MAX_TOTAL: u8 = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("{condition}: {points} points is out of range (0-4)")]
    PointsOutOfRange { condition: Condition, points: u8 },
    #[error("total {0} is out of range (0-20)")]
    TotalOutOfRange(u8),
    #[error("expected 5 condition levels, got {0}")]
    WrongLevelCount(usize),
    #[error("score sheet is incomplete: {0} not scored")]
    Incomplete(Condition),
    #[error("sheet for {sheet} paired with task {task}")]
    IdMismatch { task: String, sheet: String },
    #[error("stored total {stored} does not equal the level sum {sum}")]
    InconsistentTotal { stored: u8, sum: u8 },
    #[error("unknown condition {0:?}")]
    UnknownCondition(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    StandardizedInput,
    WellDefinedRules,
    Repetitive,
    DataDependent,
    ObjectiveOutput,
}

impl Condition {
    /// Canonical column order.
    pub const ALL: [Condition; 5] = [
        Condition::StandardizedInput,
        Condition::WellDefinedRules,
        Condition::Repetitive,
        Condition::DataDependent,
        Condition::ObjectiveOutput,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn key(self) -> &'static str {
        match self {
            Condition::StandardizedInput => "standardized_input",
            Condition::WellDefinedRules => "well_defined_rules",
            Condition::Repetitive => "repetitive",
            Condition::DataDependent => "data_dependent",
            Condition::ObjectiveOutput => "objective_output",
        }
    }

    /// Condition heading as used in the rubric text.
    pub fn title(self) -> &'static str {
        match self {
            Condition::StandardizedInput => "Standardized Input",
            Condition::WellDefinedRules => "Well-Defined Rules",
            Condition::Repetitive => "Repetitive",
            Condition::DataDependent => "Data-Dependent",
            Condition::ObjectiveOutput => "Objective Output",
        }
    }

    /// Ranking-table column heading.
    pub fn column_label(self) -> &'static str {
        RANKING_HEADER[self.index() + 1]
    }

    pub fn interactive_prompt(self) -> &'static str {
        statements::prompt(self)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Condition {
    type Err = IndexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .to_lowercase()
            .chars()
            .map(|c| if c == '-' || c == ' ' { '_' } else { c })
            .collect();
        Condition::ALL
            .into_iter()
            .find(|c| c.key() == norm)
            .or_else(|| (norm == "verifiable_or_measurable_output").then_some(Condition::ObjectiveOutput))
            .ok_or_else(|| IndexError::UnknownCondition(s.to_owned()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelStatement {
    pub condition: Condition,
    pub points: u8,
    /// Published wording, typos included.
    pub text: &'static str,
}

impl LevelStatement {
    /// Wording with the known typo in the data-dependent 0-point statement
    /// corrected. Only for display; `text` is the canonical form.
    pub fn display_text(&self) -> &'static str {
        if self.condition == Condition::DataDependent && self.points == 0 {
            "Data not necessary for task completion."
        } else {
            self.text
        }
    }
}

pub fn level_statement(condition: Condition, points: u8) -> Result<LevelStatement, IndexError> {
    if points > MAX_POINTS {
        return Err(IndexError::PointsOutOfRange { condition, points });
    }
    Ok(LevelStatement {
        condition,
        points,
        text: statements::STATEMENTS[condition.index()][points as usize],
    })
}

/// All 25 statements, condition-major.
pub fn all_statements() -> Vec<LevelStatement> {
    Condition::ALL
        .into_iter()
        .flat_map(|c| (0..=MAX_POINTS).map(move |p| level_statement(c, p).expect("in range")))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpretationBand {
    NotSuitable,
    LimitedSuitability,
    ModeratelySuitable,
    Suitable,
    HighlySuitable,
}

impl InterpretationBand {
    pub const ALL: [InterpretationBand; 5] = [
        InterpretationBand::NotSuitable,
        InterpretationBand::LimitedSuitability,
        InterpretationBand::ModeratelySuitable,
        InterpretationBand::Suitable,
        InterpretationBand::HighlySuitable,
    ];

    /// Inclusive total range.
    pub fn range(self) -> (u8, u8) {
        match self {
            InterpretationBand::NotSuitable => (0, 3),
            InterpretationBand::LimitedSuitability => (4, 7),
            InterpretationBand::ModeratelySuitable => (8, 11),
            InterpretationBand::Suitable => (12, 15),
            InterpretationBand::HighlySuitable => (16, 20),
        }
    }

    pub fn label(self) -> &'static str {
        band_label(self)
    }
}

impl fmt::Display for InterpretationBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(band_label(*self))
    }
}

pub fn interpret(total: u8) -> Result<InterpretationBand, IndexError> {
    Ok(match total {
        0..=3 => InterpretationBand::NotSuitable,
        4..=7 => InterpretationBand::LimitedSuitability,
        8..=11 => InterpretationBand::ModeratelySuitable,
        12..=15 => InterpretationBand::Suitable,
        16..=20 => InterpretationBand::HighlySuitable,
        _ => return Err(IndexError::TotalOutOfRange(total)),
    })
}

/// Display label of a band. The limited band carries no "(Low?)" qualifier.
pub fn band_label(band: InterpretationBand) -> &'static str {
    match band {
        InterpretationBand::NotSuitable => "Not Suitable for Automation",
        InterpretationBand::LimitedSuitability => "Limited Suitability for Automation",
        InterpretationBand::ModeratelySuitable => "Moderately Suitable for Automation",
        InterpretationBand::Suitable => "Suitable for Automation",
        InterpretationBand::HighlySuitable => "Highly Suitable for Automation",
    }
}

/// A complete score sheet. Construct with [`make_score_sheet`]; the total and
/// band always agree with the levels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSheet")]
pub struct AutomationScoreSheet {
    pub task_id: String,
    levels: [u8; 5],
    total: u8,
    band: InterpretationBand,
    /// Who scored the task, e.g. a person's name or "llm".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assessor: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Deserialize)]
struct RawSheet {
    task_id: String,
    levels: [u8; 5],
    total: u8,
    band: InterpretationBand,
    assessor: Option<String>,
    notes: Option<String>,
}

impl TryFrom<RawSheet> for AutomationScoreSheet {
    type Error = IndexError;

    fn try_from(raw: RawSheet) -> Result<Self, Self::Error> {
        let mut sheet = make_score_sheet(raw.task_id, raw.levels)?;
        if sheet.total != raw.total {
            return Err(IndexError::InconsistentTotal {
                stored: raw.total,
                sum: sheet.total,
            });
        }
        if sheet.band != raw.band {
            return Err(IndexError::InconsistentTotal {
                stored: raw.total,
                sum: sheet.total,
            });
        }
        sheet.assessor = raw.assessor;
        sheet.notes = raw.notes;
        Ok(sheet)
    }
}

impl AutomationScoreSheet {
    pub fn levels(&self) -> [u8; 5] {
        self.levels
    }

    pub fn level(&self, condition: Condition) -> u8 {
        self.levels[condition.index()]
    }

    pub fn total(&self) -> u8 {
        self.total
    }

    pub fn band(&self) -> InterpretationBand {
        self.band
    }

    pub fn with_assessor(mut self, assessor: impl Into<String>) -> Self {
        self.assessor = Some(assessor.into());
        self
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = Some(notes.into());
        self
    }
}

/// Builds a sheet from five levels in canonical condition order.
pub fn make_score_sheet(task_id: impl Into<String>, levels: [u8; 5]) -> Result<AutomationScoreSheet, IndexError> {
    for (condition, points) in Condition::ALL.into_iter().zip(levels) {
        if points > MAX_POINTS {
            return Err(IndexError::PointsOutOfRange { condition, points });
        }
    }
    let total: u8 = levels.iter().sum();
    Ok(AutomationScoreSheet {
        task_id: task_id.into(),
        levels,
        total,
        band: interpret(total)?,
        assessor: None,
        notes: None,
    })
}

/// Slice form of [`make_score_sheet`] for callers holding parsed input.
pub fn make_score_sheet_from_slice(
    task_id: impl Into<String>,
    levels: &[u8],
) -> Result<AutomationScoreSheet, IndexError> {
    let levels: [u8; 5] = levels
        .try_into()
        .map_err(|_| IndexError::WrongLevelCount(levels.len()))?;
    make_score_sheet(task_id, levels)
}

/// A sheet being filled in condition by condition. It cannot be ranked
/// until every condition has a level; nothing is imputed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DraftScoreSheet {
    pub task_id: String,
    pub levels: [Option<u8>; 5],
}

impl DraftScoreSheet {
    pub fn new(task_id: impl Into<String>) -> Self {
        DraftScoreSheet {
            task_id: task_id.into(),
            levels: [None; 5],
        }
    }

    pub fn set(&mut self, condition: Condition, points: u8) -> Result<(), IndexError> {
        level_statement(condition, points)?;
        self.levels[condition.index()] = Some(points);
        Ok(())
    }

    pub fn missing(&self) -> Vec<Condition> {
        Condition::ALL
            .into_iter()
            .filter(|c| self.levels[c.index()].is_none())
            .collect()
    }

    pub fn finalize(&self) -> Result<AutomationScoreSheet, IndexError> {
        let mut levels = [0u8; 5];
        for c in Condition::ALL {
            levels[c.index()] = self.levels[c.index()].ok_or(IndexError::Incomplete(c))?;
        }
        make_score_sheet(self.task_id.clone(), levels)
    }
}
