use serde::{Deserialize, Serialize};

use crate::model::TaskDescription;

use super::{AutomationScoreSheet, IndexError};

pub const RANKING_HEADER: [&str; 7] = [
    "Task",
    "Standardized input",
    "Well-defined rules",
    "Repetitive",
    "Data-dependent",
    "Verifiable or measurable output",
    "Total score",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingRow {
    pub task_id: String,
    pub task_text: String,
    pub points: [u8; 5],
    pub total: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankingTable {
    pub header: [&'static str; 7],
    pub rows: Vec<RankingRow>,
}

impl RankingTable {
    pub fn empty() -> Self {
        RankingTable {
            header: RANKING_HEADER,
            rows: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Orders tasks from most to least automatable. Equal totals keep their
/// input order.
pub fn rank(entries: &[(TaskDescription, AutomationScoreSheet)]) -> Result<RankingTable, IndexError> {
    let mut rows = Vec::with_capacity(entries.len());
    for (task, sheet) in entries {
        if task.id != sheet.task_id {
            return Err(IndexError::IdMismatch {
                task: task.id.clone(),
                sheet: sheet.task_id.clone(),
            });
        }
        rows.push(RankingRow {
            task_id: task.id.clone(),
            task_text: task.text.clone(),
            points: sheet.levels(),
            total: sheet.total(),
        });
    }
    // slice::sort_by_key is stable.
    rows.sort_by_key(|r| std::cmp::Reverse(r.total));
    Ok(RankingTable {
        header: RANKING_HEADER,
        rows,
    })
}
