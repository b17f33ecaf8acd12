//! Strict scoring for both formats and per-group aggregation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::{Label, PredictedKey};
use crate::model::{
    nfc, DifficultyLevel, ItemResult, MatchUpPuzzle, PuzzleFormat, PuzzleMeta, RosettaPuzzle,
    ScoreReport, Topic,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("attempt has {got} answers but the puzzle has {expected} questions")]
    LengthMismatch { expected: usize, got: usize },
    #[error("attempt is for puzzle {attempt:?}, not {puzzle:?}")]
    PuzzleMismatch { attempt: String, puzzle: String },
    #[error("puzzle {0:?} has no scoreable items")]
    NoItems(String),
    #[error("label {label} is outside the puzzle's label set (A..{last})")]
    UnknownLabel { label: Label, last: Label },
    #[error("unknown puzzle id {0:?}")]
    UnknownPuzzleId(String),
}

/// One answer per question, in question order. An empty string is a blank.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosettaAttempt {
    pub puzzle_id: String,
    pub answers: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    Stage1,
    Stage2,
    Unstaged,
}

impl Stage {
    /// Stage 1 covers puzzles within Breakthrough..Intermediate, Stage 2
    /// puzzles within Advanced..Round 2; anything straddling both is unstaged.
    pub fn of(levels: &BTreeSet<DifficultyLevel>) -> Stage {
        use DifficultyLevel::*;
        if levels.is_empty() {
            Stage::Unstaged
        } else if levels.iter().all(|l| matches!(l, Breakthrough | Foundation | Intermediate)) {
            Stage::Stage1
        } else if levels.iter().all(|l| matches!(l, Advanced | Round2)) {
            Stage::Stage2
        } else {
            Stage::Unstaged
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Stage::Stage1 => "s1",
            Stage::Stage2 => "s2",
            Stage::Unstaged => "unstaged",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

/// NFC, trimmed, internal whitespace runs collapsed to one space. Case,
/// punctuation and diacritics are left alone.
pub fn normalize_answer(text: &str) -> String {
    nfc(text).split_whitespace().collect::<Vec<_>>().join(" ")
}

fn percent(n_correct: usize, n_items: usize) -> f64 {
    100.0 * n_correct as f64 / n_items as f64
}

pub fn score_rosetta(attempt: &RosettaAttempt, puzzle: &RosettaPuzzle) -> Result<ScoreReport, ScoreError> {
    if attempt.puzzle_id != puzzle.meta.id {
        return Err(ScoreError::PuzzleMismatch {
            attempt: attempt.puzzle_id.clone(),
            puzzle: puzzle.meta.id.clone(),
        });
    }
    let n = puzzle.questions.len();
    if attempt.answers.len() != n {
        return Err(ScoreError::LengthMismatch {
            expected: n,
            got: attempt.answers.len(),
        });
    }
    if n == 0 {
        return Err(ScoreError::NoItems(puzzle.meta.id.clone()));
    }

    let per_item: Vec<ItemResult> = puzzle
        .questions
        .iter()
        .zip(&attempt.answers)
        .enumerate()
        .map(|(i, (q, answer))| {
            let got = normalize_answer(answer);
            let correct = !got.is_empty()
                && q.gold_answers.iter().any(|g| normalize_answer(g) == got);
            ItemResult {
                index: i + 1,
                expected: q.gold_answers.join(" | "),
                got: (!got.is_empty()).then_some(got),
                correct,
            }
        })
        .collect();
    let n_correct = per_item.iter().filter(|r| r.correct).count();
    Ok(ScoreReport {
        puzzle_id: puzzle.meta.id.clone(),
        format: PuzzleFormat::RosettaStone,
        n_items: n,
        n_correct,
        percent: percent(n_correct, n),
        zeroed_for_alphabetical: false,
        irregular: false,
        per_item,
    })
}

/// True when the key is complete and reads A, B, C, … in source order.
pub fn is_alphabetical(key: &PredictedKey, n: usize) -> bool {
    n > 0 && (1..=n).all(|i| key.get(i).map(|l| l.rank() as usize) == Some(i))
}

pub fn score_matchup(predicted: &PredictedKey, puzzle: &MatchUpPuzzle) -> Result<ScoreReport, ScoreError> {
    let n = puzzle.n();
    if n == 0 {
        return Err(ScoreError::NoItems(puzzle.meta.id.clone()));
    }
    let last = Label::from_index(n - 1);
    if let Some((_, label)) = predicted.iter().find(|(_, l)| l.index() >= n) {
        return Err(ScoreError::UnknownLabel { label, last });
    }

    let mut uses: HashMap<Label, usize> = HashMap::new();
    for (i, label) in predicted.iter() {
        if (1..=n).contains(&i) {
            *uses.entry(label).or_default() += 1;
        }
    }
    let zeroed = is_alphabetical(predicted, n);
    let per_item: Vec<ItemResult> = (1..=n)
        .map(|i| {
            let expected = puzzle.gold_key.get(i).expect("gold key covers 1..=n");
            let got = predicted.get(i);
            let correct = !zeroed && got == Some(expected) && uses.get(&expected) == Some(&1);
            ItemResult {
                index: i,
                expected: expected.to_string(),
                got: got.map(|l| l.to_string()),
                correct,
            }
        })
        .collect();
    let n_correct = per_item.iter().filter(|r| r.correct).count();
    Ok(ScoreReport {
        puzzle_id: puzzle.meta.id.clone(),
        format: PuzzleFormat::MatchUp,
        n_items: n,
        n_correct,
        percent: if zeroed { 0.0 } else { percent(n_correct, n) },
        zeroed_for_alphabetical: zeroed,
        irregular: predicted.is_irregular(n),
        per_item,
    })
}

/// A score report tagged with the solver that produced the attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub solver_id: String,
    pub report: ScoreReport,
}

/// Display form of a topic set, e.g. "Morphology, Syntax".
pub fn topic_set_label(topics: &BTreeSet<Topic>) -> String {
    topics.iter().map(|t| t.name()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub topics: String,
    pub stage: Stage,
    pub format: PuzzleFormat,
    pub solver_id: String,
    pub mean_percent: f64,
    pub n_reports: usize,
    /// Reports zeroed by the alphabetical-order rule.
    pub n_zeroed: usize,
}

/// Unweighted mean percent per (topic set, stage, format, solver). Rows are
/// ordered by topic label, then stage, format and solver id.
pub fn aggregate(
    reports: &[SolverReport],
    metadata: &HashMap<String, PuzzleMeta>,
) -> Result<Vec<AggregateRow>, ScoreError> {
    type Key = (String, Stage, PuzzleFormat, String);
    let mut groups: BTreeMap<Key, (Vec<f64>, usize)> = BTreeMap::new();
    for sr in reports {
        let meta = metadata
            .get(&sr.report.puzzle_id)
            .ok_or_else(|| ScoreError::UnknownPuzzleId(sr.report.puzzle_id.clone()))?;
        let key = (
            topic_set_label(&meta.topics),
            Stage::of(&meta.difficulty_levels),
            sr.report.format,
            sr.solver_id.clone(),
        );
        let entry = groups.entry(key).or_default();
        entry.0.push(sr.report.percent);
        entry.1 += usize::from(sr.report.zeroed_for_alphabetical);
    }
    Ok(groups
        .into_iter()
        .map(|((topics, stage, format, solver_id), (values, n_zeroed))| AggregateRow {
            topics,
            stage,
            format,
            solver_id,
            mean_percent: values.iter().sum::<f64>() / values.len() as f64,
            n_reports: values.len(),
            n_zeroed,
        })
        .collect())
}
