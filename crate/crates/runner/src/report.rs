//! Topic × stage tables of mean scores, one column per solver and format.
//!
//! The layout follows the published results table: rows are topic sets split
//! by stage, columns are grouped under "Rosetta Stone Original Puzzle" and
//! "Match-Up Conversion", and each Match-Up solver carries a companion column
//! counting reports zeroed by the alphabetical-order rule.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use matchup_core::score::{aggregate, AggregateRow, ScoreError, SolverReport, Stage};
use matchup_core::{PuzzleFormat, PuzzleMeta};

pub const TITLE: &str = "Average Scores by Linguistic Topic and Stage";
pub const ROSETTA_GROUP: &str = "Rosetta Stone Original Puzzle";
pub const MATCHUP_GROUP: &str = "Match-Up Conversion";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Mean,
    Zeroed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub group: String,
    pub format: PuzzleFormat,
    pub solver_id: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn header(&self) -> String {
        match self.kind {
            ColumnKind::Mean => self.solver_id.clone(),
            ColumnKind::Zeroed => format!("{} zeroed", self.solver_id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub topics: String,
    pub stage: Stage,
    /// Aligned with `columns`; `None` where a solver has no reports.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub title: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
}

fn group_name(format: PuzzleFormat) -> &'static str {
    match format {
        PuzzleFormat::RosettaStone => ROSETTA_GROUP,
        PuzzleFormat::MatchUp => MATCHUP_GROUP,
    }
}

/// Builds the table. `solver_order` fixes the column order for the listed
/// solvers; any others follow alphabetically.
pub fn build_report(
    reports: &[SolverReport],
    metadata: &HashMap<String, PuzzleMeta>,
    solver_order: &[String],
) -> Result<ReportTable, ScoreError> {
    let rows = aggregate(reports, metadata)?;
    Ok(layout(&rows, solver_order))
}

pub fn layout(agg: &[AggregateRow], solver_order: &[String]) -> ReportTable {
    let rank = |s: &str| {
        solver_order
            .iter()
            .position(|x| x == s)
            .unwrap_or(solver_order.len())
    };
    let mut columns = Vec::new();
    for format in [PuzzleFormat::RosettaStone, PuzzleFormat::MatchUp] {
        let mut solvers: Vec<&str> = agg
            .iter()
            .filter(|r| r.format == format)
            .map(|r| r.solver_id.as_str())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        solvers.sort_by_key(|s| (rank(s), s.to_string()));
        for s in solvers {
            let col = |kind| Column {
                group: group_name(format).to_string(),
                format,
                solver_id: s.to_string(),
                kind,
            };
            columns.push(col(ColumnKind::Mean));
            if format == PuzzleFormat::MatchUp {
                columns.push(col(ColumnKind::Zeroed));
            }
        }
    }

    type Cells<'a> = HashMap<(PuzzleFormat, &'a str), &'a AggregateRow>;
    let mut cells: BTreeMap<(String, Stage), Cells> = BTreeMap::new();
    for r in agg {
        cells
            .entry((r.topics.clone(), r.stage))
            .or_default()
            .insert((r.format, r.solver_id.as_str()), r);
    }
    let rows = cells
        .into_iter()
        .map(|((topics, stage), by_col)| Row {
            values: columns
                .iter()
                .map(|c| {
                    by_col.get(&(c.format, c.solver_id.as_str())).map(|r| match c.kind {
                        ColumnKind::Mean => r.mean_percent,
                        ColumnKind::Zeroed => r.n_zeroed as f64,
                    })
                })
                .collect(),
            topics,
            stage,
        })
        .collect();
    ReportTable {
        title: TITLE.to_string(),
        columns,
        rows,
    }
}

/// Means print with up to two decimals and no trailing zeros ("96", "56.6").
pub fn format_value(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

impl ReportTable {
    /// Two header lines (column group, solver) followed by one line per row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let mut groups = vec![String::new(), String::new()];
        groups.extend(self.columns.iter().map(|c| c.group.clone()));
        w.write_record(&groups).expect("in-memory write");
        let mut header = vec!["Topic".to_string(), "Stage".to_string()];
        header.extend(self.columns.iter().map(Column::header));
        w.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            let mut rec = vec![row.topics.clone(), row.stage.to_string()];
            rec.extend(row.values.iter().map(|v| v.map(format_value).unwrap_or_default()));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV of UTF-8 fields")
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("# {}\n\n", self.title);
        let mut header = vec!["Topic".to_string(), "Stage".to_string()];
        header.extend(self.columns.iter().map(|c| {
            let short = match c.format {
                PuzzleFormat::RosettaStone => "RS",
                PuzzleFormat::MatchUp => "MU",
            };
            format!("{} ({short})", c.header())
        }));
        out.push_str(&format!("| {} |\n", header.join(" | ")));
        out.push_str(&format!("|{}\n", "---|".repeat(header.len())));
        for row in &self.rows {
            let mut cells = vec![row.topics.clone(), row.stage.to_string()];
            cells.extend(row.values.iter().map(|v| v.map(format_value).unwrap_or_else(|| "-".into())));
            out.push_str(&format!("| {} |\n", cells.join(" | ")));
        }
        out.push_str(&format!(
            "\nRS = {ROSETTA_GROUP}; MU = {MATCHUP_GROUP}. \"zeroed\" counts Match-Up answers given in \
             plain alphabetical order, which score 0.\n"
        ));
        out
    }
}
