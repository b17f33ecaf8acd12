//! Reading model answers back into keys and attempts.
//!
//! Match-Up answers are accepted in the usual shapes models produce:
//! `1 → B`, `1 -> B`, `1-B`, `1: B`, `1. B`, several pairs on one line,
//! markdown tables (row- or column-oriented) and, as a last resort, a bare
//! sequence of exactly n labels read positionally. A later statement for
//! the same number overrides an earlier one. Numbers outside 1..n and
//! letters outside the puzzle's label range are ignored.

use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

use matchup_core::label::{Label, PredictedKey};
use matchup_core::model::{MatchUpPuzzle, RosettaPuzzle};
use matchup_core::score::RosettaAttempt;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseFailure {
    #[error("no index/label pairs and no sequence of exactly {n} labels found")]
    Unparseable { n: usize },
}

fn pair_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        // number, separator, label, then end of chunk or a non-letter tail
        // ("1 → B (Mary is walking)"), never a following word ("1. A woman").
        Regex::new(
            r"^(\d+)\s*(?:→|⟶|->|=>|=|–|—|-|:|\.|\))\s*([A-Z]{1,2})(?:\s*$|\s*[(\[\-–—:;,.].*$)",
        )
        .expect("valid regex")
    })
}

fn rosetta_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^Q\s*(\d+)\s*[:.)]\s*(.*)$").expect("valid regex"))
}

/// Markdown emphasis, code ticks and list bullets removed.
fn clean_line(line: &str) -> String {
    let line: String = line.chars().filter(|c| !matches!(c, '*' | '`' | '_')).collect();
    let trimmed = line.trim();
    let trimmed = trimmed
        .strip_prefix("- ")
        .or_else(|| trimmed.strip_prefix("• "))
        .unwrap_or(trimmed);
    trimmed.trim().to_string()
}

fn in_range_label(text: &str, n: usize) -> Option<Label> {
    let label: Label = text.trim().parse().ok()?;
    (label.index() < n).then_some(label)
}

fn in_range_index(text: &str, n: usize) -> Option<usize> {
    let i: usize = text.trim().parse().ok()?;
    (1..=n).contains(&i).then_some(i)
}

fn table_cells(line: &str) -> Option<Vec<String>> {
    let t = line.trim();
    if !t.starts_with('|') {
        return None;
    }
    let inner = t.trim_start_matches('|').trim_end_matches('|');
    Some(inner.split('|').map(|c| c.trim().to_string()).collect())
}

fn is_separator_row(cells: &[String]) -> bool {
    cells
        .iter()
        .all(|c| !c.is_empty() && c.chars().all(|ch| matches!(ch, '-' | ':' | ' ')))
}

/// Appends the pairs found in one markdown table. Row tables carry one pair
/// per row; column tables put the numbers in one row and the labels in the next.
fn table_pairs(rows: &[Vec<String>], n: usize, out: &mut Vec<(usize, Label)>) {
    let rows: Vec<&Vec<String>> = rows.iter().filter(|r| !is_separator_row(r)).collect();
    let mut k = 0;
    while k < rows.len() {
        let row = rows[k];
        if let Some(index) = row.iter().find_map(|c| in_range_index(c, n)) {
            let label = row.iter().rev().find_map(|c| in_range_label(c, n));
            let numeric_row = row.iter().skip(1).all(|c| in_range_index(c, n).is_some());
            if numeric_row && row.len() > 2 && k + 1 < rows.len() {
                let next = rows[k + 1];
                let labels: Vec<Option<Label>> = next.iter().map(|c| in_range_label(c, n)).collect();
                if next.len() == row.len() && labels.iter().skip(1).all(Option::is_some) {
                    for (c, l) in row.iter().zip(&labels).skip(1) {
                        out.push((in_range_index(c, n).unwrap(), l.unwrap()));
                    }
                    k += 2;
                    continue;
                }
            }
            if let Some(label) = label {
                out.push((index, label));
            }
        }
        k += 1;
    }
}

fn line_pairs(line: &str, n: usize, out: &mut Vec<(usize, Label)>) {
    for chunk in line.split([',', ';']) {
        if let Some(c) = pair_regex().captures(chunk.trim()) {
            if let (Some(i), Some(l)) = (in_range_index(&c[1], n), in_range_label(&c[2], n)) {
                out.push((i, l));
            }
        }
    }
}

/// Labels from lines that hold nothing but labels and separators, or a single
/// run of exactly n letters such as `BCLGIDHJFKAE`.
fn positional_labels(lines: &[String], n: usize) -> Option<Vec<Label>> {
    let mut labels = Vec::new();
    for line in lines {
        let tokens: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || ",;.|→>()[]-".contains(c))
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() || !tokens.iter().all(|t| t.chars().all(|c| c.is_ascii_uppercase())) {
            continue;
        }
        if tokens.len() == 1 && tokens[0].len() == n && n > 2 {
            labels.extend(tokens[0].chars().map(|c| Label::from_index((c as u8 - b'A') as usize)));
        } else if tokens.iter().all(|t| t.len() <= 2) {
            for t in tokens {
                labels.push(t.parse().ok()?);
            }
        }
    }
    (labels.len() == n && labels.iter().all(|l| l.index() < n)).then_some(labels)
}

pub fn parse_matchup_response(raw: &str, puzzle: &MatchUpPuzzle) -> Result<PredictedKey, ParseFailure> {
    let n = puzzle.source_items.len();
    let lines: Vec<String> = raw.lines().map(clean_line).collect();

    let mut pairs = Vec::new();
    let mut table: Vec<Vec<String>> = Vec::new();
    for line in &lines {
        if let Some(cells) = table_cells(line) {
            table.push(cells);
            continue;
        }
        if !table.is_empty() {
            table_pairs(&table, n, &mut pairs);
            table.clear();
        }
        line_pairs(line, n, &mut pairs);
    }
    table_pairs(&table, n, &mut pairs);

    if !pairs.is_empty() {
        let mut key = PredictedKey::new();
        for (i, l) in pairs {
            key.insert(i, l);
        }
        return Ok(key);
    }
    positional_labels(&lines, n)
        .map(|labels| labels.into_iter().enumerate().map(|(i, l)| (i + 1, l)).collect())
        .ok_or(ParseFailure::Unparseable { n })
}

fn strip_quotes(text: &str) -> &str {
    let t = text.trim();
    for (open, close) in [('"', '"'), ('\'', '\''), ('“', '”'), ('‘', '’'), ('«', '»')] {
        if let Some(inner) = t.strip_prefix(open).and_then(|s| s.strip_suffix(close)) {
            return inner.trim();
        }
    }
    t
}

/// One answer per question from `Qk:` lines; unanswered questions are blank.
pub fn parse_rosetta_response(raw: &str, puzzle: &RosettaPuzzle) -> RosettaAttempt {
    let mut answers = vec![String::new(); puzzle.questions.len()];
    for line in raw.lines() {
        let line = line.replace(['*', '`'], "");
        let Some(c) = rosetta_regex().captures(line.trim()) else {
            continue;
        };
        let Ok(k) = c[1].parse::<usize>() else { continue };
        if (1..=answers.len()).contains(&k) {
            answers[k - 1] = strip_quotes(&c[2]).to_string();
        }
    }
    RosettaAttempt {
        puzzle_id: puzzle.meta.id.clone(),
        answers,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use matchup_core::fixtures;

    fn gold_lines(sep: &str) -> String {
        fixtures::gilbertese_matchup()
            .gold_key
            .labels()
            .iter()
            .enumerate()
            .map(|(i, l)| format!("{}{sep}{l}", i + 1))
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn gold() -> PredictedKey {
        PredictedKey::from(&fixtures::gilbertese_matchup().gold_key)
    }

    #[test]
    fn line_formats() {
        let p = fixtures::gilbertese_matchup();
        for sep in [" → ", " -> ", "-", ": ", ". ", " - ", ") ", " = "] {
            assert_eq!(parse_matchup_response(&gold_lines(sep), &p).unwrap(), gold(), "{sep:?}");
        }
    }

    #[test]
    fn trailing_glosses_are_fine_but_prose_is_not_a_label() {
        let p = fixtures::polish_matchup();
        let key = parse_matchup_response("1 → D (Alice saw the neighbour)\n2. A woman", &p).unwrap();
        assert_eq!(key.len(), 1);
        assert_eq!(key.get(1).unwrap().to_string(), "D");
    }

    #[test]
    fn later_lines_override() {
        let p = fixtures::polish_matchup();
        let key = parse_matchup_response("1: A\n2: B\n1: C", &p).unwrap();
        assert_eq!(key.get(1).unwrap().to_string(), "C");
        assert_eq!(key.len(), 2);
    }

    #[test]
    fn inline_pairs_and_bold() {
        let p = fixtures::polish_matchup();
        let key = parse_matchup_response("**1-D**, 2-F; 3-B, 4-E, 5-A, 6-C", &p).unwrap();
        assert_eq!(key, PredictedKey::from(&p.gold_key));
    }

    #[test]
    fn out_of_range_is_dropped() {
        let p = fixtures::polish_matchup();
        let key = parse_matchup_response("1: Z\n9: A\n2: F", &p).unwrap();
        assert_eq!(key.len(), 1);
        assert!(parse_matchup_response("7: A", &p).is_err());
    }

    #[test]
    fn positional_sequences() {
        let p = fixtures::polish_matchup();
        let gold = PredictedKey::from(&p.gold_key);
        assert_eq!(parse_matchup_response("D F B E A C", &p).unwrap(), gold);
        assert_eq!(parse_matchup_response("D, F, B, E, A, C", &p).unwrap(), gold);
        assert_eq!(parse_matchup_response("DFBEAC", &p).unwrap(), gold);
        assert!(parse_matchup_response("D F B E A", &p).is_err());
    }

    #[test]
    fn column_table() {
        let p = fixtures::polish_matchup();
        let raw = "| Polish | 1 | 2 | 3 | 4 | 5 | 6 |\n|---|---|---|---|---|---|---|\n| English | D | F | B | E | A | C |";
        assert_eq!(parse_matchup_response(raw, &p).unwrap(), PredictedKey::from(&p.gold_key));
    }

    #[test]
    fn prose_is_unparseable() {
        let p = fixtures::polish_matchup();
        assert_eq!(
            parse_matchup_response("I am not sure how to match these sentences.", &p),
            Err(ParseFailure::Unparseable { n: 6 })
        );
        assert!(parse_matchup_response("", &p).is_err());
    }

    #[test]
    fn rosetta_lines() {
        let p = fixtures::gilbertese_rosetta();
        let a = parse_rosetta_response(
            "Q1: \"A takaakaro aiine ningaabong\"\n**Q2:** Ko tekateka irarikin te titooa ŋkoe n te bong aei",
            &p,
        );
        assert_eq!(a.answers[0], "A takaakaro aiine ningaabong");
        assert_eq!(a.answers[1], "Ko tekateka irarikin te titooa ŋkoe n te bong aei");
        let a = parse_rosetta_response("Q2: x", &p);
        assert_eq!(a.answers, vec!["".to_string(), "x".to_string()]);
        assert_eq!(parse_rosetta_response("", &p).answers, vec![String::new(), String::new()]);
        assert_eq!(parse_rosetta_response("q3: y", &p).answers, vec![String::new(), String::new()]);
    }
}
