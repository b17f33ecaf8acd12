//! Rosetta Stone → Match-Up conversion.
//!
//! Given pairs and answered translation questions are merged into one list of
//! text pairs. Source texts keep their order and are numbered 1..n; English
//! texts are shuffled with a seeded Fisher–Yates pass and labelled A.. in the
//! order they are presented.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::label::{AnswerKey, Label};
use crate::model::{Direction, MatchUpPuzzle, PuzzleFormat, RosettaPuzzle, TextPair};
use crate::rng::{shuffled_indices, splitmix64, SplitMix64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConversionConfig {
    pub shuffle_seed: u64,
    /// Total number of shuffles tried before giving up on a non-identity key.
    pub max_reshuffles: u32,
}

impl ConversionConfig {
    pub fn with_seed(shuffle_seed: u64) -> Self {
        ConversionConfig {
            shuffle_seed,
            ..Default::default()
        }
    }
}

impl Default for ConversionConfig {
    fn default() -> Self {
        ConversionConfig {
            shuffle_seed: 0,
            max_reshuffles: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NotConvertible {
    /// Question at this 0-based position has no gold answer.
    MissingGoldAnswer { question: usize },
    /// Question at this position lists several alternative answers.
    MultiTemplateAnswer { question: usize, alternatives: usize },
    AmbiguousTargets { text: String },
    AmbiguousSources { text: String },
    TooFewPairs { n: usize },
}

impl NotConvertible {
    /// Short machine-friendly reason.
    pub fn reason(&self) -> &'static str {
        match self {
            NotConvertible::MissingGoldAnswer { .. } => "missing gold answer",
            NotConvertible::MultiTemplateAnswer { .. } => "multi-template answer",
            NotConvertible::AmbiguousTargets { .. } => "ambiguous targets",
            NotConvertible::AmbiguousSources { .. } => "ambiguous sources",
            NotConvertible::TooFewPairs { .. } => "fewer than 2 pairs",
        }
    }
}

impl fmt::Display for NotConvertible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NotConvertible::MissingGoldAnswer { question } => {
                write!(f, "{} (question {})", self.reason(), question + 1)
            }
            NotConvertible::MultiTemplateAnswer {
                question,
                alternatives,
            } => write!(
                f,
                "{} (question {} has {alternatives} alternatives)",
                self.reason(),
                question + 1
            ),
            NotConvertible::AmbiguousTargets { text } | NotConvertible::AmbiguousSources { text } => {
                write!(f, "{} ({text:?} occurs twice)", self.reason())
            }
            NotConvertible::TooFewPairs { n } => write!(f, "{} (got {n})", self.reason()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConvertError {
    #[error("not convertible: {0}")]
    NotConvertible(NotConvertible),
    #[error("every one of {attempts} shuffles produced the identity key")]
    DegenerateShuffle { attempts: u32 },
    #[error("max_reshuffles must be at least 1")]
    InvalidConfig,
}

impl From<NotConvertible> for ConvertError {
    fn from(e: NotConvertible) -> Self {
        ConvertError::NotConvertible(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Convertibility {
    Convertible,
    NotConvertible(NotConvertible),
}

/// Given pairs followed by one pair per answered question.
pub fn merge_pairs(puzzle: &RosettaPuzzle) -> Result<Vec<TextPair>, NotConvertible> {
    let mut pairs = puzzle.given_pairs.clone();
    for (i, q) in puzzle.questions.iter().enumerate() {
        let answer = match q.gold_answers.as_slice() {
            [] => return Err(NotConvertible::MissingGoldAnswer { question: i }),
            [only] if only.trim().is_empty() => {
                return Err(NotConvertible::MissingGoldAnswer { question: i })
            }
            [only] => only.clone(),
            many => {
                return Err(NotConvertible::MultiTemplateAnswer {
                    question: i,
                    alternatives: many.len(),
                })
            }
        };
        pairs.push(match q.direction {
            Direction::ToSource => TextPair::new(answer, q.prompt_text.clone()),
            Direction::ToTarget => TextPair::new(q.prompt_text.clone(), answer),
        });
    }

    let mut sources = HashSet::new();
    let mut targets = HashSet::new();
    for pair in &pairs {
        if !targets.insert(pair.target_text.as_str()) {
            return Err(NotConvertible::AmbiguousTargets {
                text: pair.target_text.clone(),
            });
        }
        if !sources.insert(pair.source_text.as_str()) {
            return Err(NotConvertible::AmbiguousSources {
                text: pair.source_text.clone(),
            });
        }
    }
    Ok(pairs)
}

pub fn check_convertible(puzzle: &RosettaPuzzle) -> Convertibility {
    match merge_pairs(puzzle) {
        Ok(pairs) if pairs.len() >= 2 => Convertibility::Convertible,
        Ok(pairs) => Convertibility::NotConvertible(NotConvertible::TooFewPairs { n: pairs.len() }),
        Err(e) => Convertibility::NotConvertible(e),
    }
}

/// Id given to the Match-Up counterpart of a Rosetta puzzle.
pub fn matchup_id(rosetta_id: &str) -> String {
    format!("{rosetta_id}-matchup")
}

/// Builds the Match-Up puzzle for an explicit presentation order:
/// `order[k]` is the merged pair whose English text is shown with label k+1.
pub fn arrange(
    puzzle: &RosettaPuzzle,
    merged: &[TextPair],
    order: &[usize],
    shuffle_seed: u64,
) -> MatchUpPuzzle {
    assert_eq!(order.len(), merged.len(), "order must cover every pair");
    let mut key = vec![0usize; merged.len()];
    for (position, &pair) in order.iter().enumerate() {
        key[pair] = position;
    }
    let mut meta = puzzle.meta.clone();
    meta.id = matchup_id(&puzzle.meta.id);
    meta.format = PuzzleFormat::MatchUp;
    MatchUpPuzzle {
        meta,
        preamble: puzzle.preamble.clone(),
        source_items: merged.iter().map(|p| p.source_text.clone()).collect(),
        target_items: order.iter().map(|&i| merged[i].target_text.clone()).collect(),
        gold_key: AnswerKey::from_positions(&key),
        shuffle_seed,
        source_puzzle_id: Some(puzzle.meta.id.clone()),
        extras: puzzle.extras.clone(),
    }
}

/// Presentation order for `n` items under `config`, skipping identity draws.
pub fn presentation_order(n: usize, config: &ConversionConfig) -> Result<Vec<usize>, ConvertError> {
    if config.max_reshuffles == 0 {
        return Err(ConvertError::InvalidConfig);
    }
    let mut seed = config.shuffle_seed;
    for attempt in 0..config.max_reshuffles {
        if attempt > 0 {
            seed = splitmix64(seed);
        }
        let order = shuffled_indices(n, &mut SplitMix64::new(seed));
        if order.iter().enumerate().any(|(k, &i)| k != i) {
            return Ok(order);
        }
    }
    Err(ConvertError::DegenerateShuffle {
        attempts: config.max_reshuffles,
    })
}

pub fn convert(puzzle: &RosettaPuzzle, config: &ConversionConfig) -> Result<MatchUpPuzzle, ConvertError> {
    let merged = merge_pairs(puzzle)?;
    if merged.len() < 2 {
        return Err(NotConvertible::TooFewPairs { n: merged.len() }.into());
    }
    let order = presentation_order(merged.len(), config)?;
    Ok(arrange(puzzle, &merged, &order, config.shuffle_seed))
}

/// Labels in presented order, for display.
pub fn labels(n: usize) -> impl Iterator<Item = Label> {
    (0..n).map(Label::from_index)
}
