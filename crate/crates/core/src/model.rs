//! Domain types shared across the toolkit.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::label::AnswerKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DifficultyLevel {
    Breakthrough,
    Foundation,
    Intermediate,
    Advanced,
    Round2,
}

impl DifficultyLevel {
    pub const ALL: [DifficultyLevel; 5] = [
        DifficultyLevel::Breakthrough,
        DifficultyLevel::Foundation,
        DifficultyLevel::Intermediate,
        DifficultyLevel::Advanced,
        DifficultyLevel::Round2,
    ];

    /// Position on the difficulty scale, 0 = Breakthrough.
    pub fn ordinal(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Topic {
    Morphology,
    Syntax,
    Semantics,
    Phonology,
    WritingSystems,
    NumberSystems,
    Computational,
}

impl Topic {
    pub fn name(self) -> &'static str {
        match self {
            Topic::Morphology => "Morphology",
            Topic::Syntax => "Syntax",
            Topic::Semantics => "Semantics",
            Topic::Phonology => "Phonology",
            Topic::WritingSystems => "WritingSystems",
            Topic::NumberSystems => "NumberSystems",
            Topic::Computational => "Computational",
        }
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PuzzleFormat {
    RosettaStone,
    MatchUp,
}

impl fmt::Display for PuzzleFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PuzzleFormat::RosettaStone => "RosettaStone",
            PuzzleFormat::MatchUp => "MatchUp",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PuzzleMeta {
    pub id: String,
    pub year: i32,
    pub competition: String,
    pub language_name: String,
    pub language_family: String,
    pub difficulty_levels: BTreeSet<DifficultyLevel>,
    pub topics: BTreeSet<Topic>,
    pub author: String,
    pub format: PuzzleFormat,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextPair {
    /// Text in the puzzle language.
    pub source_text: String,
    /// English text.
    pub target_text: String,
}

impl TextPair {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        TextPair {
            source_text: source.into(),
            target_text: target.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// English prompt, answer in the puzzle language.
    ToSource,
    /// Puzzle-language prompt, English answer.
    ToTarget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslationQuestion {
    pub direction: Direction,
    pub prompt_text: String,
    pub gold_answers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RosettaPuzzle {
    pub meta: PuzzleMeta,
    pub preamble: String,
    #[serde(rename = "pairs")]
    pub given_pairs: Vec<TextPair>,
    #[serde(default)]
    pub questions: Vec<TranslationQuestion>,
    /// Unscored auxiliary questions, carried verbatim.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extras: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchUpPuzzle {
    pub meta: PuzzleMeta,
    pub preamble: String,
    /// Puzzle-language items, numbered 1..=n in order.
    pub source_items: Vec<String>,
    /// English items, labelled A.. in presented order.
    pub target_items: Vec<String>,
    pub gold_key: AnswerKey,
    pub shuffle_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_puzzle_id: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extras: Vec<String>,
}

impl MatchUpPuzzle {
    pub fn n(&self) -> usize {
        self.source_items.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Puzzle {
    Rosetta(RosettaPuzzle),
    MatchUp(MatchUpPuzzle),
}

impl Puzzle {
    pub fn meta(&self) -> &PuzzleMeta {
        match self {
            Puzzle::Rosetta(p) => &p.meta,
            Puzzle::MatchUp(p) => &p.meta,
        }
    }

    pub fn id(&self) -> &str {
        &self.meta().id
    }

    pub fn format(&self) -> PuzzleFormat {
        match self {
            Puzzle::Rosetta(_) => PuzzleFormat::RosettaStone,
            Puzzle::MatchUp(_) => PuzzleFormat::MatchUp,
        }
    }

    pub fn preamble(&self) -> &str {
        match self {
            Puzzle::Rosetta(p) => &p.preamble,
            Puzzle::MatchUp(p) => &p.preamble,
        }
    }

    pub fn as_rosetta(&self) -> Option<&RosettaPuzzle> {
        match self {
            Puzzle::Rosetta(p) => Some(p),
            Puzzle::MatchUp(_) => None,
        }
    }

    pub fn as_matchup(&self) -> Option<&MatchUpPuzzle> {
        match self {
            Puzzle::MatchUp(p) => Some(p),
            Puzzle::Rosetta(_) => None,
        }
    }

    /// Rewrites every stored string into Unicode NFC.
    pub fn normalize_text(&mut self) {
        match self {
            Puzzle::Rosetta(p) => {
                normalize_meta(&mut p.meta);
                nfc_in_place(&mut p.preamble);
                for pair in &mut p.given_pairs {
                    nfc_in_place(&mut pair.source_text);
                    nfc_in_place(&mut pair.target_text);
                }
                for q in &mut p.questions {
                    nfc_in_place(&mut q.prompt_text);
                    q.gold_answers.iter_mut().for_each(nfc_in_place);
                }
                p.extras.iter_mut().for_each(nfc_in_place);
            }
            Puzzle::MatchUp(p) => {
                normalize_meta(&mut p.meta);
                nfc_in_place(&mut p.preamble);
                p.source_items.iter_mut().for_each(nfc_in_place);
                p.target_items.iter_mut().for_each(nfc_in_place);
                if let Some(id) = &mut p.source_puzzle_id {
                    nfc_in_place(id);
                }
                p.extras.iter_mut().for_each(nfc_in_place);
            }
        }
    }
}

impl From<RosettaPuzzle> for Puzzle {
    fn from(p: RosettaPuzzle) -> Self {
        Puzzle::Rosetta(p)
    }
}

impl From<MatchUpPuzzle> for Puzzle {
    fn from(p: MatchUpPuzzle) -> Self {
        Puzzle::MatchUp(p)
    }
}

fn normalize_meta(meta: &mut PuzzleMeta) {
    for s in [
        &mut meta.id,
        &mut meta.competition,
        &mut meta.language_name,
        &mut meta.language_family,
        &mut meta.author,
    ] {
        nfc_in_place(s);
    }
}

pub fn nfc(text: &str) -> String {
    text.nfc().collect()
}

pub fn is_nfc(text: &str) -> bool {
    unicode_normalization::is_nfc(text)
}

fn nfc_in_place(s: &mut String) {
    if !is_nfc(s) {
        *s = nfc(s);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemResult {
    /// 1-based question or source index.
    pub index: usize,
    pub expected: String,
    pub got: Option<String>,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub puzzle_id: String,
    pub format: PuzzleFormat,
    pub n_items: usize,
    pub n_correct: usize,
    pub percent: f64,
    pub zeroed_for_alphabetical: bool,
    /// The scored prediction was partial or non-injective.
    #[serde(default)]
    pub irregular: bool,
    pub per_item: Vec<ItemResult>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nfc_composes_decomposed_input() {
        let decomposed = "e\u{0328}"; // e + combining ogonek
        assert!(!is_nfc(decomposed));
        assert_eq!(nfc(decomposed), "ę");
        assert!(is_nfc("ŋkoe"));
        assert_eq!(nfc("ŋkoe"), "ŋkoe");
    }

    #[test]
    fn difficulty_ordinals_follow_scale() {
        let ords: Vec<usize> = DifficultyLevel::ALL.iter().map(|d| d.ordinal()).collect();
        assert_eq!(ords, vec![0, 1, 2, 3, 4]);
    }
}
