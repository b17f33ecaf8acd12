//! Zero-shot prompt templates.
//!
//! The model sees the preamble verbatim followed by the puzzle data and a
//! strict answer-format instruction. There are no worked examples and no
//! hints, and a Match-Up prompt never states any pairing.

use std::fmt::Write as _;

use matchup_core::label::Label;
use matchup_core::model::{Direction, MatchUpPuzzle, Puzzle, RosettaPuzzle};

pub fn build_prompt(puzzle: &Puzzle) -> String {
    match puzzle {
        Puzzle::Rosetta(p) => build_rosetta_prompt(p),
        Puzzle::MatchUp(p) => build_matchup_prompt(p),
    }
}

fn push_preamble(out: &mut String, preamble: &str) {
    let preamble = preamble.trim();
    if !preamble.is_empty() {
        out.push_str(preamble);
        out.push_str("\n\n");
    }
}

pub fn build_rosetta_prompt(p: &RosettaPuzzle) -> String {
    let lang = &p.meta.language_name;
    let mut out = String::new();
    push_preamble(&mut out, &p.preamble);
    let _ = writeln!(out, "Here are some sentences in {lang} with their English translations:\n");
    for (i, pair) in p.given_pairs.iter().enumerate() {
        let _ = writeln!(out, "{}. {}", i + 1, pair.source_text);
        let _ = writeln!(out, "   {}", pair.target_text);
    }
    let _ = writeln!(out, "\nTranslate the following:\n");
    for (k, q) in p.questions.iter().enumerate() {
        let into = match q.direction {
            Direction::ToSource => lang.as_str(),
            Direction::ToTarget => "English",
        };
        let _ = writeln!(out, "Q{} (into {into}): {}", k + 1, q.prompt_text);
    }
    let _ = write!(
        out,
        "\nGive exactly one answer per line in the form \"Qk: <answer>\", \
         where k is the question number. Do not add any other text.\n"
    );
    out
}

pub fn build_matchup_prompt(p: &MatchUpPuzzle) -> String {
    let lang = &p.meta.language_name;
    let n = p.source_items.len();
    let mut out = String::new();
    push_preamble(&mut out, &p.preamble);
    let _ = writeln!(
        out,
        "Below are {n} sentences in {lang}, numbered 1 to {n}, and their {n} English \
         translations, lettered {} to {}, in a different order. Match each {lang} sentence \
         with its English translation. Each letter is used exactly once.\n",
        Label::from_index(0),
        Label::from_index(n.saturating_sub(1)),
    );
    let _ = writeln!(out, "{lang} sentences:");
    for (i, s) in p.source_items.iter().enumerate() {
        let _ = writeln!(out, "{}. {s}", i + 1);
    }
    let _ = writeln!(out, "\nEnglish sentences:");
    for (j, t) in p.target_items.iter().enumerate() {
        let _ = writeln!(out, "{}. {t}", Label::from_index(j));
    }
    let _ = write!(
        out,
        "\nAnswer with one line per {lang} sentence in the form \"<number> → <letter>\", \
         covering every number from 1 to {n}. Do not add any other text.\n"
    );
    out
}

/// Gold pairings that appear verbatim in a Match-Up prompt, rendered the way
/// a parser would read them. An honest prompt yields none.
pub fn leaked_pairings(prompt: &str, p: &MatchUpPuzzle) -> Vec<String> {
    let mut leaks = Vec::new();
    for (i, label) in p.gold_key.labels().iter().enumerate() {
        let n = i + 1;
        for form in [
            format!("{n} → {label}"),
            format!("{n} -> {label}"),
            format!("{n}: {label}"),
            format!("{n}-{label}"),
        ] {
            if prompt.contains(&form) {
                leaks.push(form);
            }
        }
        // A source sentence and its translation stated on one line.
        let target = &p.target_items[label.index()];
        if prompt
            .lines()
            .any(|line| line.contains(p.source_items[i].as_str()) && line.contains(target.as_str()))
        {
            leaks.push(format!("{n} with {label} on one line"));
        }
    }
    leaks
}
