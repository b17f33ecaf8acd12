mod common;

use std::collections::{BTreeMap, HashMap};
use std::fs;

use common::{config_in, corpus_manifest, repo_root};
use matchup_core::score::SolverReport;
use matchup_core::PuzzleMeta;
use matchup_runner::pipeline::{run_report, ReportOptions};
use matchup_runner::report::{MATCHUP_GROUP, ROSETTA_GROUP, TITLE};

fn fixture_reports() -> Vec<SolverReport> {
    fs::read_to_string(repo_root().join("fixtures/reports/scores.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn fixture_meta() -> HashMap<String, PuzzleMeta> {
    let list: Vec<PuzzleMeta> =
        serde_json::from_slice(&fs::read(repo_root().join("fixtures/reports/metadata.json")).unwrap()).unwrap();
    list.into_iter().map(|m| (m.id.clone(), m)).collect()
}

/// Stage by the rule written out longhand.
fn oracle_stage(meta: &PuzzleMeta) -> &'static str {
    let names: Vec<String> = meta.difficulty_levels.iter().map(|d| format!("{d:?}")).collect();
    let easy = ["Breakthrough", "Foundation", "Intermediate"];
    let hard = ["Advanced", "Round2"];
    if !names.is_empty() && names.iter().all(|n| easy.contains(&n.as_str())) {
        "s1"
    } else if !names.is_empty() && names.iter().all(|n| hard.contains(&n.as_str())) {
        "s2"
    } else {
        "unstaged"
    }
}

/// Independent means keyed by (topics, stage, format, solver).
fn oracle_means() -> BTreeMap<(String, String, String, String), f64> {
    let meta = fixture_meta();
    let mut sums: BTreeMap<(String, String, String, String), (f64, usize)> = BTreeMap::new();
    for r in fixture_reports() {
        let m = &meta[&r.report.puzzle_id];
        let topics: Vec<String> = m.topics.iter().map(|t| t.to_string()).collect();
        let key = (
            topics.join(", "),
            oracle_stage(m).to_string(),
            format!("{}", r.report.format),
            r.solver_id.clone(),
        );
        let e = sums.entry(key).or_default();
        e.0 += r.report.percent;
        e.1 += 1;
    }
    sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

fn run_fixture_report() -> (tempfile::TempDir, matchup_runner::report::ReportTable) {
    let dir = tempfile::tempdir().unwrap();
    let config = config_in(dir.path(), &corpus_manifest("manifest.json"), "");
    let table = run_report(
        &config,
        &ReportOptions {
            scores: Some(repo_root().join("fixtures/reports/scores.jsonl")),
            metadata: vec![repo_root().join("fixtures/reports/metadata.json")],
            solver_order: vec![],
        },
    )
    .unwrap();
    (dir, table)
}

#[test]
fn morphology_stage1_matchup_mean_is_96() {
    let (_dir, table) = run_fixture_report();
    let col = table
        .columns
        .iter()
        .position(|c| c.group == MATCHUP_GROUP && c.header() == "HE")
        .unwrap();
    let row = table
        .rows
        .iter()
        .find(|r| r.topics == "Morphology" && r.stage.to_string() == "s1")
        .unwrap();
    assert_eq!(row.values[col], Some(96.0));
}

#[test]
fn every_cell_matches_the_oracle() {
    let (_dir, table) = run_fixture_report();
    let oracle = oracle_means();
    let mut seen = 0;
    for row in &table.rows {
        for (c, v) in table.columns.iter().zip(&row.values) {
            if c.header().ends_with(" zeroed") {
                continue;
            }
            let key = (row.topics.clone(), row.stage.to_string(), c.format.to_string(), c.solver_id.clone());
            match (oracle.get(&key), v) {
                (Some(o), Some(v)) => {
                    assert!((o - v).abs() < 1e-9, "{key:?}: {o} vs {v}");
                    seen += 1;
                }
                (None, None) => {}
                other => panic!("{key:?}: {other:?}"),
            }
        }
    }
    assert_eq!(seen, oracle.len());
}

#[test]
fn csv_has_split_header_and_topic_stage_rows() {
    let (dir, _) = run_fixture_report();
    let csv = fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(csv.as_bytes());
    let rows: Vec<Vec<String>> = rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();

    assert_eq!(&rows[0][..2], ["", ""]);
    assert_eq!(&rows[1][..2], ["Topic", "Stage"]);
    // Rosetta group first, then Match-Up, each contiguous.
    let groups = &rows[0][2..];
    let first_mu = groups.iter().position(|g| g == MATCHUP_GROUP).unwrap();
    assert!(groups[..first_mu].iter().all(|g| g == ROSETTA_GROUP));
    assert!(groups[first_mu..].iter().all(|g| g == MATCHUP_GROUP));
    assert_eq!(&rows[1][2..], ["HE", "gpt-5", "HE", "HE zeroed", "gpt-5", "gpt-5 zeroed"]);

    let body: Vec<(&str, &str)> = rows[2..].iter().map(|r| (r[0].as_str(), r[1].as_str())).collect();
    assert_eq!(
        body,
        [
            ("Morphology", "s1"),
            ("Phonology", "unstaged"),
            ("Syntax", "s2"),
            ("Syntax, Semantics", "s2"),
        ]
    );
    let morph = &rows[2];
    assert_eq!(morph[4], "96");
    assert_eq!(morph[6], "50", "one of two gpt-5 Match-Up answers was zeroed");
    assert_eq!(morph[7], "1");
    assert_eq!(morph[2], "87.5");
}

#[test]
fn stage2_rows_are_omitted_without_stage2_reports() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("s1-only.jsonl");
    let keep: Vec<String> = fs::read_to_string(repo_root().join("fixtures/reports/scores.jsonl"))
        .unwrap()
        .lines()
        .filter(|l| l.contains("synth-morph-"))
        .map(String::from)
        .collect();
    fs::write(&scores, keep.join("\n") + "\n").unwrap();
    let config = config_in(dir.path(), &corpus_manifest("manifest.json"), "");
    let table = run_report(
        &config,
        &ReportOptions {
            scores: Some(scores),
            metadata: vec![repo_root().join("fixtures/reports/metadata.json")],
            solver_order: vec![],
        },
    )
    .unwrap();
    assert_eq!(table.rows.len(), 1);
    assert_eq!(table.rows[0].stage.to_string(), "s1");
}

#[test]
fn json_and_markdown_carry_the_title() {
    let (dir, table) = run_fixture_report();
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(json["title"], TITLE);
    assert_eq!(json["rows"].as_array().unwrap().len(), table.rows.len());
    let md = fs::read_to_string(dir.path().join("out/report.md")).unwrap();
    assert!(md.starts_with(&format!("# {TITLE}")));
}

#[test]
fn solver_order_overrides_alphabetical() {
    let dir = tempfile::tempdir().unwrap();
    let config = config_in(dir.path(), &corpus_manifest("manifest.json"), "");
    let table = run_report(
        &config,
        &ReportOptions {
            scores: Some(repo_root().join("fixtures/reports/scores.jsonl")),
            metadata: vec![repo_root().join("fixtures/reports/metadata.json")],
            solver_order: vec!["gpt-5".into()],
        },
    )
    .unwrap();
    let headers: Vec<String> = table.columns.iter().map(|c| c.header()).collect();
    assert_eq!(headers, ["gpt-5", "HE", "gpt-5", "gpt-5 zeroed", "HE", "HE zeroed"]);
}

#[test]
fn unknown_puzzle_ids_are_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = config_in(dir.path(), &corpus_manifest("manifest.json"), "");
    let err = run_report(
        &config,
        &ReportOptions {
            scores: Some(repo_root().join("fixtures/reports/scores.jsonl")),
            metadata: vec![],
            solver_order: vec![],
        },
    )
    .unwrap_err();
    assert!(err.to_string().contains("unknown puzzle id"), "{err}");
}
