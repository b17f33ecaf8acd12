//! Structural checks over puzzles. Violations are returned as data.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::model::{is_nfc, MatchUpPuzzle, Puzzle, PuzzleFormat, PuzzleMeta, RosettaPuzzle};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Violation {
            field: field.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Validation {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn violation(&mut self, field: impl Into<String>, rule: impl Into<String>) {
        self.violations.push(Violation::new(field, rule));
    }

    fn warning(&mut self, field: impl Into<String>, rule: impl Into<String>) {
        self.warnings.push(Violation::new(field, rule));
    }

    fn text(&mut self, field: impl Into<String>, value: &str, single_line: bool) {
        let field = field.into();
        if value.trim().is_empty() {
            self.violation(field.clone(), "must be non-empty after trimming");
        }
        if single_line && value.contains(['\n', '\r']) {
            self.violation(field.clone(), "must not contain newline characters");
        }
        if !is_nfc(value) {
            self.violation(field, "must be NFC-normalized");
        }
    }
}

pub fn validate_puzzle(puzzle: &Puzzle) -> Validation {
    match puzzle {
        Puzzle::Rosetta(p) => validate_rosetta(p),
        Puzzle::MatchUp(p) => validate_matchup(p),
    }
}

pub fn validate_rosetta(p: &RosettaPuzzle) -> Validation {
    let mut v = Validation::default();
    check_meta(&mut v, &p.meta, PuzzleFormat::RosettaStone);
    check_preamble(&mut v, &p.preamble);

    if p.given_pairs.is_empty() {
        v.violation("pairs", "must contain at least one pair");
    }
    let mut seen = HashSet::new();
    for (i, pair) in p.given_pairs.iter().enumerate() {
        v.text(format!("pairs[{i}].source_text"), &pair.source_text, true);
        v.text(format!("pairs[{i}].target_text"), &pair.target_text, true);
        if !seen.insert((&pair.source_text, &pair.target_text)) {
            v.violation(format!("pairs[{i}]"), "duplicate (source_text, target_text) pair");
        }
    }

    for (i, q) in p.questions.iter().enumerate() {
        v.text(format!("questions[{i}].prompt_text"), &q.prompt_text, true);
        if q.gold_answers.is_empty() {
            v.violation(
                format!("questions[{i}].gold_answers"),
                "must list at least one answer",
            );
        }
        for (k, answer) in q.gold_answers.iter().enumerate() {
            v.text(format!("questions[{i}].gold_answers[{k}]"), answer, false);
        }
    }
    for (i, extra) in p.extras.iter().enumerate() {
        if !is_nfc(extra) {
            v.violation(format!("extras[{i}]"), "must be NFC-normalized");
        }
    }
    v
}

pub fn validate_matchup(p: &MatchUpPuzzle) -> Validation {
    let mut v = Validation::default();
    check_meta(&mut v, &p.meta, PuzzleFormat::MatchUp);
    check_preamble(&mut v, &p.preamble);

    let n = p.source_items.len();
    if n < 2 {
        v.violation("source_items", "must contain at least 2 items");
    }
    if p.target_items.len() != n {
        v.violation(
            "target_items",
            format!("must have the same length as source_items ({n})"),
        );
    }
    for (i, s) in p.source_items.iter().enumerate() {
        v.text(format!("source_items[{i}]"), s, true);
    }
    for (i, t) in p.target_items.iter().enumerate() {
        v.text(format!("target_items[{i}]"), t, true);
    }

    if p.gold_key.len() != n {
        v.violation("gold_key", format!("must map exactly {n} source indices"));
    } else {
        let mut used = HashSet::new();
        for (i, label) in p.gold_key.labels().iter().enumerate() {
            if label.index() >= p.target_items.len() {
                v.violation(
                    format!("gold_key[{}]", i + 1),
                    format!("label {label} is outside the target label set"),
                );
            } else if !used.insert(*label) {
                v.violation(
                    format!("gold_key[{}]", i + 1),
                    format!("label {label} is assigned more than once (not injective)"),
                );
            }
        }
        if n >= 2 && p.gold_key.is_identity() {
            v.violation("gold_key", "must not be the identity mapping");
        }
    }
    if let Some(id) = &p.source_puzzle_id {
        if id.trim().is_empty() {
            v.violation("source_puzzle_id", "must be non-empty when present");
        }
    }
    v
}

fn check_preamble(v: &mut Validation, preamble: &str) {
    if preamble.trim().is_empty() {
        v.warning("preamble", "preamble is empty");
    } else if !is_nfc(preamble) {
        v.violation("preamble", "must be NFC-normalized");
    }
}

fn check_meta(v: &mut Validation, meta: &PuzzleMeta, expected: PuzzleFormat) {
    if meta.id.trim().is_empty() {
        v.violation("meta.id", "must be non-empty");
    }
    if meta.format != expected {
        v.violation(
            "meta.format",
            format!("must be {expected} for this puzzle shape"),
        );
    }
    if meta.topics.is_empty() {
        v.violation("meta.topics", "must be non-empty");
    }
    let levels: Vec<usize> = meta.difficulty_levels.iter().map(|d| d.ordinal()).collect();
    match levels.as_slice() {
        [] => v.violation("meta.difficulty_levels", "must be non-empty"),
        [_] => {}
        [a, b] if b - a == 1 => {}
        [_, _] => v.violation(
            "meta.difficulty_levels",
            "two levels must be adjacent on the difficulty scale",
        ),
        _ => v.violation("meta.difficulty_levels", "at most 2 adjacent levels"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::label::{AnswerKey, Label};
    use crate::model::DifficultyLevel;

    #[test]
    fn gilbertese_fixture_is_clean() {
        let p = fixtures::gilbertese_rosetta();
        let v = validate_rosetta(&p);
        assert!(v.violations.is_empty(), "{:?}", v.violations);
        assert!(v.warnings.is_empty());
        assert_eq!(p.given_pairs.len(), 10);
        assert_eq!(p.questions.len(), 2);
    }

    #[test]
    fn matchup_fixtures_are_clean() {
        assert!(validate_matchup(&fixtures::polish_matchup()).violations.is_empty());
        assert!(validate_matchup(&fixtures::gilbertese_matchup()).violations.is_empty());
    }

    #[test]
    fn duplicate_gold_label_is_one_injectivity_violation() {
        let mut p = fixtures::polish_matchup();
        let mut labels = p.gold_key.labels().to_vec();
        // Polish key is D F B E A C; make index 1 also point at F.
        labels[0] = Label::from_index(5);
        p.gold_key = AnswerKey::new(labels);
        let v = validate_matchup(&p);
        assert_eq!(v.violations.len(), 1, "{:?}", v.violations);
        assert!(v.violations[0].rule.contains("injective"));
    }

    #[test]
    fn empty_preamble_is_a_warning_only() {
        let mut p = fixtures::gilbertese_rosetta();
        p.preamble.clear();
        let v = validate_rosetta(&p);
        assert!(v.violations.is_empty());
        assert_eq!(v.warnings.len(), 1);
        assert_eq!(v.warnings[0].field, "preamble");
    }

    #[test]
    fn identity_gold_key_rejected() {
        let mut p = fixtures::polish_matchup();
        p.gold_key = AnswerKey::identity(6);
        let v = validate_matchup(&p);
        assert_eq!(v.violations.len(), 1);
        assert_eq!(v.violations[0].field, "gold_key");
    }

    #[test]
    fn difficulty_rules() {
        let mut p = fixtures::gilbertese_rosetta();
        p.meta.difficulty_levels = [DifficultyLevel::Breakthrough, DifficultyLevel::Intermediate]
            .into_iter()
            .collect();
        assert!(!validate_rosetta(&p).is_valid());
        p.meta.difficulty_levels.clear();
        assert!(!validate_rosetta(&p).is_valid());
        p.meta.difficulty_levels = [DifficultyLevel::Advanced, DifficultyLevel::Round2]
            .into_iter()
            .collect();
        assert!(validate_rosetta(&p).is_valid());
    }

    #[test]
    fn pair_text_rules() {
        let mut p = fixtures::gilbertese_rosetta();
        p.given_pairs[0].target_text = "  ".into();
        p.given_pairs[1].source_text = "line\nbreak".into();
        p.given_pairs.push(p.given_pairs[2].clone());
        p.meta.topics.clear();
        p.meta.format = PuzzleFormat::MatchUp;
        let v = validate_rosetta(&p);
        let fields: Vec<&str> = v.violations.iter().map(|x| x.field.as_str()).collect();
        assert!(fields.contains(&"pairs[0].target_text"));
        assert!(fields.contains(&"pairs[1].source_text"));
        assert!(fields.contains(&"pairs[10]"));
        assert!(fields.contains(&"meta.topics"));
        assert!(fields.contains(&"meta.format"));
    }

    #[test]
    fn matchup_shape_rules() {
        let mut p = fixtures::polish_matchup();
        p.target_items.pop();
        assert!(validate_matchup(&p)
            .violations
            .iter()
            .any(|x| x.field == "target_items"));
        let mut p = fixtures::polish_matchup();
        p.source_items.truncate(1);
        p.target_items.truncate(1);
        p.gold_key = AnswerKey::identity(1);
        assert!(validate_matchup(&p)
            .violations
            .iter()
            .any(|x| x.field == "source_items"));
    }

    #[test]
    fn non_nfc_text_is_flagged() {
        let mut p = fixtures::polish_matchup();
        p.source_items[1] = "Kot zjadł kiełbase\u{0328}.".into();
        let v = validate_matchup(&p);
        assert_eq!(v.violations.len(), 1);
        assert_eq!(v.violations[0].field, "source_items[1]");
    }

    #[test]
    fn validation_is_pure() {
        let p: Puzzle = fixtures::gilbertese_rosetta().into();
        assert_eq!(validate_puzzle(&p), validate_puzzle(&p));
    }
}
