//! Batch stages: convert, solve, eval-llm, score, report.
//!
//! Every stage reads and writes files under the configured output directory
//! and produces the same bytes when re-run on the same inputs.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use matchup_core::convert::{convert, ConvertError};
use matchup_core::corpus::{canonical_json, write_puzzle_file, Corpus, ManifestEntry};
use matchup_core::score::SolverReport;
use matchup_core::solver::{solve, SimilarityMatrix};
use matchup_core::{
    load_corpus, score_matchup, score_rosetta, CorpusManifest, PredictedKey, Puzzle, PuzzleFormat,
    PuzzleMeta, RosettaAttempt,
};
use matchup_harness::{build_prompt, parse_matchup_response, parse_rosetta_response, Client, ModelSpec};

use crate::config::RunConfig;
use crate::report::{build_report, ReportTable};

pub const BASELINE_ID: &str = "baseline";

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn to_canonical<T: Serialize>(value: &T) -> String {
    canonical_json(&serde_json::to_value(value).expect("plain data serializes"))
}

fn load(path: &Path) -> Result<Corpus> {
    let corpus = load_corpus(path).with_context(|| format!("loading corpus {}", path.display()))?;
    for d in &corpus.diagnostics {
        tracing::warn!(puzzle = %d.puzzle_id, path = %d.path, "{}", d.message);
    }
    Ok(corpus)
}

// ---------------------------------------------------------------- convert

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conversion {
    pub rosetta_id: String,
    pub matchup_id: String,
    pub path: String,
    pub n_items: usize,
    pub shuffle_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub puzzle_id: String,
    pub reason: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversionSummary {
    pub corpus_name: String,
    pub puzzles_loaded: usize,
    pub conversions: Vec<Conversion>,
    /// Rosetta puzzles that could not be converted, with the reason.
    pub failures: Vec<Failure>,
    /// Files listed in the manifest that failed to load.
    pub load_errors: Vec<Failure>,
}

fn puzzle_path(id: &str) -> String {
    format!("puzzles/{id}.json")
}

/// Copies every selected puzzle into `<out>/corpus`, adds a Match-Up
/// conversion for each convertible Rosetta puzzle, and writes a manifest and
/// `conversion_summary.json`. Per-puzzle problems are reported, not fatal.
pub fn run_convert(config: &RunConfig) -> Result<ConversionSummary> {
    config.ensure_output_dir()?;
    let corpus = load(&config.manifest)?;
    let out_corpus = config.output_dir.join("corpus");
    let selected: Vec<&Puzzle> = corpus
        .puzzles
        .iter()
        .filter(|p| config.filters.accepts(p.meta()))
        .collect();
    let existing: std::collections::HashSet<&str> = corpus.puzzles.iter().map(|p| p.id()).collect();

    let mut entries = Vec::new();
    let mut conversions = Vec::new();
    let mut failures = Vec::new();
    for puzzle in selected.iter().copied() {
        let deviation = corpus
            .manifest
            .entries
            .iter()
            .find(|e| e.puzzle_id == puzzle.id())
            .and_then(|e| e.deviation_note.clone());
        write_puzzle_file(&out_corpus.join(puzzle_path(puzzle.id())), puzzle)?;
        entries.push(ManifestEntry {
            deviation_note: deviation,
            ..ManifestEntry::for_puzzle(puzzle, puzzle_path(puzzle.id()))
        });

        let Puzzle::Rosetta(rosetta) = puzzle else { continue };
        let fail = |reason: &str, detail: String| Failure {
            puzzle_id: rosetta.meta.id.clone(),
            reason: reason.to_string(),
            detail,
        };
        let cc = config.seed.conversion_config(&rosetta.meta.id);
        match convert(rosetta, &cc) {
            Ok(m) if existing.contains(m.meta.id.as_str()) => failures.push(fail(
                "id collision",
                format!("the corpus already holds a puzzle with id {:?}", m.meta.id),
            )),
            Ok(m) => {
                let path = puzzle_path(&m.meta.id);
                let m = Puzzle::MatchUp(m);
                write_puzzle_file(&out_corpus.join(&path), &m)?;
                entries.push(ManifestEntry::for_puzzle(&m, path.clone()));
                let m = m.as_matchup().expect("just built");
                conversions.push(Conversion {
                    rosetta_id: rosetta.meta.id.clone(),
                    matchup_id: m.meta.id.clone(),
                    path,
                    n_items: m.n(),
                    shuffle_seed: m.shuffle_seed,
                });
            }
            Err(ConvertError::NotConvertible(nc)) => failures.push(fail(nc.reason(), nc.to_string())),
            Err(e) => failures.push(fail("conversion error", e.to_string())),
        }
    }

    let manifest = CorpusManifest {
        corpus_name: corpus.manifest.corpus_name.clone(),
        version: corpus.manifest.version.clone(),
        entries,
    };
    write(&config.converted_manifest(), manifest.to_bytes())?;
    let summary = ConversionSummary {
        corpus_name: corpus.manifest.corpus_name.clone(),
        puzzles_loaded: corpus.puzzles.len(),
        conversions,
        failures,
        load_errors: corpus
            .diagnostics
            .iter()
            .map(|d| Failure {
                puzzle_id: d.puzzle_id.clone(),
                reason: "load error".into(),
                detail: d.message.clone(),
            })
            .collect(),
    };
    write(&config.output_dir.join("conversion_summary.json"), to_canonical(&summary))?;
    Ok(summary)
}

/// The converted corpus written by `convert`.
pub fn load_converted(config: &RunConfig) -> Result<Corpus> {
    let path = config.converted_manifest();
    if !path.exists() {
        bail!("{} does not exist; run `convert` first", path.display());
    }
    load(&path)
}

// ---------------------------------------------------------------- predictions

/// What a solver produced for one puzzle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prediction {
    Key { key: PredictedKey },
    Answers { answers: Vec<String> },
    /// A response from which no key could be read. Scored as an empty key.
    Unparseable { reason: String },
    /// No response at all (missing credentials, network failure). Not scored.
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub solver_id: String,
    pub puzzle_id: String,
    pub format: PuzzleFormat,
    #[serde(flatten)]
    pub prediction: Prediction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(r).expect("plain data serializes"));
        out.push('\n');
    }
    write(path, out)
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{}:{}", path.display(), i + 1)))
        .collect()
}

/// File-name-safe form of a solver or model id.
pub fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

fn matrix_csv(m: &SimilarityMatrix) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Runs the baseline solver on every selected Match-Up puzzle.
pub fn run_solve(config: &RunConfig, dump_matrices: bool) -> Result<Vec<PredictionRecord>> {
    let corpus = load_converted(config)?;
    let mut records = Vec::new();
    for puzzle in corpus.puzzles.iter().filter(|p| config.filters.accepts(p.meta())) {
        let Puzzle::MatchUp(m) = puzzle else { continue };
        let record = |prediction, note| PredictionRecord {
            solver_id: BASELINE_ID.into(),
            puzzle_id: m.meta.id.clone(),
            format: PuzzleFormat::MatchUp,
            prediction,
            note,
        };
        match solve(m, &config.solver) {
            Ok(solution) => {
                if dump_matrices {
                    let dir = config.output_dir.join("matrices").join(file_stem(&m.meta.id));
                    let d = &solution.diagnostics;
                    for (name, mat) in [
                        ("length", &d.features.length),
                        ("names", &d.features.names),
                        ("cooccurrence", &d.features.cooccurrence),
                        ("combined", &d.combined),
                    ] {
                        write(&dir.join(format!("{name}.csv")), matrix_csv(mat))?;
                    }
                }
                let note = solution.diagnostics.uninformative.then(|| "uninformative".to_string());
                records.push(record(Prediction::Key { key: solution.predicted() }, note));
            }
            Err(e) => records.push(record(Prediction::Failed { error: e.to_string() }, None)),
        }
    }
    write_jsonl(&config.predictions_dir().join(format!("{BASELINE_ID}.jsonl")), &records)?;
    Ok(records)
}

/// Parses a raw model response into a prediction for `puzzle`.
pub fn interpret_response(raw: &str, puzzle: &Puzzle) -> Prediction {
    match puzzle {
        Puzzle::MatchUp(m) => match parse_matchup_response(raw, m) {
            Ok(key) => Prediction::Key { key },
            Err(e) => Prediction::Unparseable { reason: e.to_string() },
        },
        Puzzle::Rosetta(r) => Prediction::Answers {
            answers: parse_rosetta_response(raw, r).answers,
        },
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalOptions {
    /// Never contact a provider: puzzles without a cached response fail.
    pub cache_only: bool,
}

/// Queries each model on every selected puzzle, `llm.concurrency` requests
/// at a time. Results are merged in puzzle order.
pub fn run_eval_llm(
    config: &RunConfig,
    client: &Client,
    models: &[ModelSpec],
    options: EvalOptions,
) -> Result<BTreeMap<String, Vec<PredictionRecord>>> {
    let corpus = load_converted(config)?;
    let puzzles: Vec<&Puzzle> = corpus
        .puzzles
        .iter()
        .filter(|p| config.filters.accepts(p.meta()))
        .collect();
    let mut all = BTreeMap::new();
    for spec in models {
        let next = AtomicUsize::new(0);
        let workers = config.llm.concurrency.min(puzzles.len()).max(1);
        let mut slots: Vec<Option<PredictionRecord>> = vec![None; puzzles.len()];
        let results: Vec<Vec<(usize, PredictionRecord)>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|_| {
                    s.spawn(|| {
                        let mut done = Vec::new();
                        loop {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            let Some(puzzle) = puzzles.get(i) else { break };
                            done.push((i, evaluate_one(client, spec, puzzle, options)));
                        }
                        done
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        for (i, r) in results.into_iter().flatten() {
            slots[i] = Some(r);
        }
        let records: Vec<PredictionRecord> = slots.into_iter().map(|r| r.expect("every slot filled")).collect();
        let failed = records
            .iter()
            .filter(|r| matches!(r.prediction, Prediction::Failed { .. }))
            .count();
        if failed > 0 {
            tracing::warn!(model = %spec.model_name, failed, "some queries returned no response");
        }
        write_jsonl(
            &config.predictions_dir().join(format!("{}.jsonl", file_stem(&spec.model_name))),
            &records,
        )?;
        all.insert(spec.model_name.clone(), records);
    }
    Ok(all)
}

fn evaluate_one(client: &Client, spec: &ModelSpec, puzzle: &Puzzle, options: EvalOptions) -> PredictionRecord {
    let prompt = build_prompt(puzzle);
    let response = if options.cache_only {
        client
            .cached(spec, &prompt)
            .map_err(|e| e.to_string())
            .and_then(|r| r.ok_or_else(|| "no cached response".to_string()))
    } else {
        client.query(spec, &prompt).map_err(|e| e.to_string())
    };
    let prediction = match response {
        Ok(r) => interpret_response(&r.raw_text, puzzle),
        Err(error) => Prediction::Failed { error },
    };
    PredictionRecord {
        solver_id: spec.model_name.clone(),
        puzzle_id: puzzle.id().to_string(),
        format: puzzle.format(),
        prediction,
        note: None,
    }
}

// ---------------------------------------------------------------- score

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScoreSummary {
    pub scored: usize,
    /// Records with no response, left out of the scores.
    pub skipped: Vec<String>,
    /// Records the scorer rejected.
    pub errors: Vec<String>,
}

pub fn score_record(record: &PredictionRecord, puzzle: &Puzzle) -> Result<Option<SolverReport>> {
    let report = match (&record.prediction, puzzle) {
        (Prediction::Failed { .. }, _) => return Ok(None),
        (Prediction::Key { key }, Puzzle::MatchUp(m)) => score_matchup(key, m)?,
        (Prediction::Unparseable { .. }, Puzzle::MatchUp(m)) => score_matchup(&PredictedKey::new(), m)?,
        (Prediction::Answers { answers }, Puzzle::Rosetta(r)) => score_rosetta(
            &RosettaAttempt {
                puzzle_id: r.meta.id.clone(),
                answers: answers.clone(),
            },
            r,
        )?,
        (Prediction::Unparseable { .. }, Puzzle::Rosetta(r)) => score_rosetta(
            &RosettaAttempt {
                puzzle_id: r.meta.id.clone(),
                answers: vec![String::new(); r.questions.len()],
            },
            r,
        )?,
        _ => bail!("prediction kind does not fit a {} puzzle", puzzle.format()),
    };
    Ok(Some(SolverReport {
        solver_id: record.solver_id.clone(),
        report,
    }))
}

fn prediction_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    Ok(files)
}

/// Scores every prediction file and writes `scores.jsonl`, sorted by solver
/// and puzzle id.
pub fn run_score(config: &RunConfig) -> Result<(Vec<SolverReport>, ScoreSummary)> {
    let corpus = load_converted(config)?;
    let by_id: HashMap<&str, &Puzzle> = corpus.puzzles.iter().map(|p| (p.id(), p)).collect();
    let mut reports = Vec::new();
    let mut summary = ScoreSummary::default();
    for file in prediction_files(&config.predictions_dir())? {
        for record in read_jsonl::<PredictionRecord>(&file)? {
            let tag = format!("{}/{}", record.solver_id, record.puzzle_id);
            let Some(puzzle) = by_id.get(record.puzzle_id.as_str()) else {
                summary.errors.push(format!("{tag}: unknown puzzle id"));
                continue;
            };
            match score_record(&record, puzzle) {
                Ok(Some(r)) => reports.push(r),
                Ok(None) => summary.skipped.push(tag),
                Err(e) => summary.errors.push(format!("{tag}: {e}")),
            }
        }
    }
    reports.sort_by(|a, b| {
        (&a.solver_id, &a.report.puzzle_id).cmp(&(&b.solver_id, &b.report.puzzle_id))
    });
    summary.scored = reports.len();
    write_jsonl(&config.scores_path(), &reports)?;
    Ok((reports, summary))
}

// ---------------------------------------------------------------- report

#[derive(Debug, Clone, Default)]
pub struct ReportOptions {
    pub scores: Option<PathBuf>,
    /// Extra metadata files, each a JSON array of puzzle metadata.
    pub metadata: Vec<PathBuf>,
    pub solver_order: Vec<String>,
}

/// Metadata for every puzzle the report may meet: the configured corpus, the
/// converted corpus if present, and any extra metadata files.
pub fn collect_metadata(config: &RunConfig, extra: &[PathBuf]) -> Result<HashMap<String, PuzzleMeta>> {
    let mut meta = HashMap::new();
    let mut sources = vec![config.manifest.clone()];
    if config.converted_manifest().exists() {
        sources.push(config.converted_manifest());
    }
    for path in sources {
        match load_corpus(&path) {
            Ok(c) => meta.extend(c.puzzles.iter().map(|p| (p.id().to_string(), p.meta().clone()))),
            Err(e) => tracing::warn!("skipping metadata from {}: {e}", path.display()),
        }
    }
    for path in extra {
        let text = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let list: Vec<PuzzleMeta> =
            serde_json::from_slice(&text).with_context(|| format!("parsing {}", path.display()))?;
        meta.extend(list.into_iter().map(|m| (m.id.clone(), m)));
    }
    Ok(meta)
}

/// Writes `report.csv`, `report.json` and `report.md`.
pub fn run_report(config: &RunConfig, options: &ReportOptions) -> Result<ReportTable> {
    config.ensure_output_dir()?;
    let scores = options.scores.clone().unwrap_or_else(|| config.scores_path());
    let reports: Vec<SolverReport> = read_jsonl(&scores)?;
    let metadata = collect_metadata(config, &options.metadata)?;
    let table = build_report(&reports, &metadata, &options.solver_order)?;
    write(&config.output_dir.join("report.csv"), table.to_csv())?;
    write(&config.output_dir.join("report.json"), table.to_json())?;
    write(&config.output_dir.join("report.md"), table.to_markdown())?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_stems_are_safe() {
        assert_eq!(file_stem("gpt-5"), "gpt-5");
        assert_eq!(file_stem("models/gemini-2.5-pro"), "models_gemini-2.5-pro");
    }

    #[test]
    fn unparseable_matchup_scores_zero() {
        let p = Puzzle::MatchUp(matchup_core::fixtures::polish_matchup());
        let rec = PredictionRecord {
            solver_id: "m".into(),
            puzzle_id: p.id().into(),
            format: PuzzleFormat::MatchUp,
            prediction: interpret_response("I could not solve this.", &p),
            note: None,
        };
        assert!(matches!(rec.prediction, Prediction::Unparseable { .. }));
        let r = score_record(&rec, &p).unwrap().unwrap();
        assert_eq!(r.report.percent, 0.0);
        assert!(!r.report.zeroed_for_alphabetical);
    }

    #[test]
    fn prediction_records_round_trip() {
        let rec = PredictionRecord {
            solver_id: "baseline".into(),
            puzzle_id: "x".into(),
            format: PuzzleFormat::MatchUp,
            prediction: Prediction::Key {
                key: [(1, "B".parse().unwrap()), (2, "A".parse().unwrap())].into_iter().collect(),
            },
            note: Some("uninformative".into()),
        };
        let line = serde_json::to_string(&rec).unwrap();
        assert_eq!(
            line,
            r#"{"solver_id":"baseline","puzzle_id":"x","format":"MatchUp","kind":"key","key":{"1":"B","2":"A"},"note":"uninformative"}"#
        );
        assert_eq!(serde_json::from_str::<PredictionRecord>(&line).unwrap(), rec);
    }
}
