//! Stage assignment and balanced selection per (topic set, stage).

use std::collections::BTreeMap;

use serde::Serialize;

use matchup_core::score::{topic_set_label, Stage};
use matchup_core::{Puzzle, PuzzleFormat};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageEntry {
    pub puzzle_id: String,
    pub format: PuzzleFormat,
    pub year: i32,
    pub topics: String,
    pub difficulty_levels: Vec<String>,
    pub stage: Stage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Shortfall {
    pub topics: String,
    pub stage: Stage,
    pub wanted: usize,
    pub available: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageListing {
    pub entries: Vec<StageEntry>,
    /// Present when balancing was requested: chosen ids per group.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<BTreeMap<String, Vec<String>>>,
    pub shortfalls: Vec<Shortfall>,
}

pub fn stage_entries<'a>(puzzles: impl IntoIterator<Item = &'a Puzzle>) -> Vec<StageEntry> {
    let mut entries: Vec<StageEntry> = puzzles
        .into_iter()
        .map(|p| {
            let meta = p.meta();
            StageEntry {
                puzzle_id: meta.id.clone(),
                format: meta.format,
                year: meta.year,
                topics: topic_set_label(&meta.topics),
                difficulty_levels: meta.difficulty_levels.iter().map(|d| format!("{d:?}")).collect(),
                stage: Stage::of(&meta.difficulty_levels),
            }
        })
        .collect();
    entries.sort_by(|a, b| {
        (&a.topics, a.stage, &a.puzzle_id).cmp(&(&b.topics, b.stage, &b.puzzle_id))
    });
    entries
}

fn group_name(topics: &str, stage: Stage) -> String {
    format!("{topics} / {stage}")
}

/// Picks up to `k` puzzles per (topic set, stage) among staged entries, most
/// recent year first and then by id, and reports groups that fall short.
pub fn balance(entries: Vec<StageEntry>, k: Option<usize>) -> StageListing {
    let Some(k) = k else {
        return StageListing {
            entries,
            selection: None,
            shortfalls: Vec::new(),
        };
    };
    let mut groups: BTreeMap<(String, Stage), Vec<&StageEntry>> = BTreeMap::new();
    for e in entries.iter().filter(|e| e.stage != Stage::Unstaged) {
        groups.entry((e.topics.clone(), e.stage)).or_default().push(e);
    }
    let mut selection = BTreeMap::new();
    let mut shortfalls = Vec::new();
    for ((topics, stage), mut members) in groups {
        members.sort_by(|a, b| b.year.cmp(&a.year).then_with(|| a.puzzle_id.cmp(&b.puzzle_id)));
        if members.len() < k {
            shortfalls.push(Shortfall {
                topics: topics.clone(),
                stage,
                wanted: k,
                available: members.len(),
            });
        }
        selection.insert(
            group_name(&topics, stage),
            members.iter().take(k).map(|e| e.puzzle_id.clone()).collect(),
        );
    }
    StageListing {
        entries,
        selection: Some(selection),
        shortfalls,
    }
}

pub fn render_listing(listing: &StageListing) -> String {
    let mut out = String::new();
    for e in &listing.entries {
        out.push_str(&format!(
            "{:<40} {:<12} {:<28} {:<9} {}\n",
            e.puzzle_id,
            e.format.to_string(),
            e.difficulty_levels.join("/"),
            e.stage.to_string(),
            e.topics
        ));
    }
    if let Some(sel) = &listing.selection {
        out.push_str("\nselection:\n");
        for (group, ids) in sel {
            out.push_str(&format!("  {group}: {}\n", ids.join(", ")));
        }
    }
    for s in &listing.shortfalls {
        out.push_str(&format!(
            "shortfall: {} / {} has {} of {} puzzles\n",
            s.topics, s.stage, s.available, s.wanted
        ));
    }
    out
}
