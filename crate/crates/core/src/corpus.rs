//! Puzzle files and corpus manifests.
//!
//! Every puzzle is a single UTF-8 JSON document. The canonical serialization
//! sorts object keys lexicographically, indents with two spaces, uses LF line
//! endings and ends with a newline, so serializing a parsed file is a byte-level
//! fixpoint. See `docs/format.md` for the schema.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::model::{MatchUpPuzzle, Puzzle, PuzzleFormat, RosettaPuzzle};
use crate::validate::validate_puzzle;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("malformed syntax at line {line}, column {column}: {message}")]
    MalformedSyntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation at `{field}`: {message}")]
    SchemaViolation { field: String, message: String },
    #[error("input is not valid UTF-8 (first bad byte at offset {offset})")]
    EncodingError { offset: usize },
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("manifest not found: {0}")]
    ManifestNotFound(PathBuf),
    #[error("manifest malformed: {0}")]
    ManifestMalformed(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Parses and validates one puzzle file. Strings are NFC-normalized on the way in.
pub fn parse_puzzle(bytes: &[u8]) -> Result<Puzzle, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ParseError::EncodingError {
        offset: e.valid_up_to(),
    })?;
    let value = parse_json(text)?;
    let format = value
        .get("meta")
        .and_then(|m| m.get("format"))
        .ok_or_else(|| ParseError::SchemaViolation {
            field: "meta.format".into(),
            message: "missing field".into(),
        })?;
    let format: PuzzleFormat =
        serde_json::from_value(format.clone()).map_err(|e| ParseError::SchemaViolation {
            field: "meta.format".into(),
            message: e.to_string(),
        })?;

    let mut puzzle = match format {
        PuzzleFormat::RosettaStone => Puzzle::Rosetta(from_value::<RosettaPuzzle>(value)?),
        PuzzleFormat::MatchUp => Puzzle::MatchUp(from_value::<MatchUpPuzzle>(value)?),
    };
    puzzle.normalize_text();

    let validation = validate_puzzle(&puzzle);
    if let Some(first) = validation.violations.first() {
        let message = validation
            .violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(ParseError::SchemaViolation {
            field: first.field.clone(),
            message,
        });
    }
    Ok(puzzle)
}

/// Canonical bytes for a puzzle.
pub fn serialize_puzzle(puzzle: &Puzzle) -> Vec<u8> {
    let value = match puzzle {
        Puzzle::Rosetta(p) => serde_json::to_value(p),
        Puzzle::MatchUp(p) => serde_json::to_value(p),
    }
    .expect("puzzle types serialize infallibly");
    canonical_json(&value).into_bytes()
}

/// Sorted keys, two-space indent, trailing newline.
pub fn canonical_json(value: &Value) -> String {
    let mut out = serde_json::to_string_pretty(&sort_keys(value)).expect("JSON values serialize");
    out.push('\n');
    out
}

fn sort_keys(value: &Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            let mut sorted = Map::new();
            for k in keys {
                sorted.insert(k.clone(), sort_keys(&map[k]));
            }
            Value::Object(sorted)
        }
        Value::Array(items) => Value::Array(items.iter().map(sort_keys).collect()),
        other => other.clone(),
    }
}

fn parse_json(text: &str) -> Result<Value, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::MalformedSyntax {
            line: 1,
            column: 0,
            message: "empty input".into(),
        });
    }
    serde_json::from_str(text).map_err(|e| ParseError::MalformedSyntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn from_value<T: serde::de::DeserializeOwned>(value: Value) -> Result<T, ParseError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        ParseError::SchemaViolation {
            field: if path == "." { "(root)".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub puzzle_id: String,
    /// Path relative to the manifest's directory.
    pub path: String,
    pub format: PuzzleFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    /// Free-text note on structural deviations from the canonical format.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation_note: Option<String>,
}

impl ManifestEntry {
    pub fn for_puzzle(puzzle: &Puzzle, path: impl Into<String>) -> Self {
        let meta = puzzle.meta();
        ManifestEntry {
            puzzle_id: meta.id.clone(),
            path: path.into(),
            format: meta.format,
            language_name: Some(meta.language_name.clone()),
            year: Some(meta.year),
            deviation_note: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusManifest {
    pub corpus_name: String,
    pub version: String,
    pub entries: Vec<ManifestEntry>,
}

impl CorpusManifest {
    pub fn parse(bytes: &[u8]) -> Result<Self, CorpusError> {
        let manifest: CorpusManifest = serde_json::from_slice(bytes)
            .map_err(|e| CorpusError::ManifestMalformed(e.to_string()))?;
        manifest.check()?;
        Ok(manifest)
    }

    pub fn check(&self) -> Result<(), CorpusError> {
        if self.corpus_name.trim().is_empty() {
            return Err(CorpusError::ManifestMalformed("corpus_name is empty".into()));
        }
        semver::Version::parse(&self.version).map_err(|e| {
            CorpusError::ManifestMalformed(format!("version {:?} is not semver: {e}", self.version))
        })?;
        let mut ids = HashSet::new();
        for entry in &self.entries {
            if !ids.insert(entry.puzzle_id.as_str()) {
                return Err(CorpusError::ManifestMalformed(format!(
                    "duplicate puzzle_id {:?}",
                    entry.puzzle_id
                )));
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        canonical_json(&serde_json::to_value(self).expect("manifest serializes")).into_bytes()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub puzzle_id: String,
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub manifest: CorpusManifest,
    pub base_dir: PathBuf,
    /// Successfully loaded puzzles, in manifest order.
    pub puzzles: Vec<Puzzle>,
    /// One entry per file that failed to load, in manifest order.
    pub diagnostics: Vec<Diagnostic>,
}

impl Corpus {
    pub fn get(&self, id: &str) -> Option<&Puzzle> {
        self.puzzles.iter().find(|p| p.id() == id)
    }
}

/// Loads every puzzle listed in a manifest. A bad file yields a diagnostic
/// and never aborts the load.
pub fn load_corpus(manifest_path: &Path) -> Result<Corpus, CorpusError> {
    let bytes = fs::read(manifest_path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CorpusError::ManifestNotFound(manifest_path.to_path_buf()),
        _ => CorpusError::Io {
            path: manifest_path.to_path_buf(),
            source: e,
        },
    })?;
    let manifest = CorpusManifest::parse(&bytes)?;
    let base_dir = manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();

    let results: Vec<Result<Puzzle, Diagnostic>> = manifest
        .entries
        .par_iter()
        .map(|entry| load_entry(&base_dir, entry))
        .collect();

    let mut puzzles = Vec::new();
    let mut diagnostics = Vec::new();
    for r in results {
        match r {
            Ok(p) => puzzles.push(p),
            Err(d) => diagnostics.push(d),
        }
    }
    Ok(Corpus {
        manifest,
        base_dir,
        puzzles,
        diagnostics,
    })
}

fn load_entry(base_dir: &Path, entry: &ManifestEntry) -> Result<Puzzle, Diagnostic> {
    let diag = |message: String| Diagnostic {
        puzzle_id: entry.puzzle_id.clone(),
        path: entry.path.clone(),
        message,
    };
    let bytes = fs::read(base_dir.join(&entry.path)).map_err(|e| diag(format!("cannot read file: {e}")))?;
    let puzzle = parse_puzzle(&bytes).map_err(|e| diag(e.to_string()))?;
    if puzzle.id() != entry.puzzle_id {
        return Err(diag(format!(
            "file declares id {:?}, manifest says {:?}",
            puzzle.id(),
            entry.puzzle_id
        )));
    }
    if puzzle.format() != entry.format {
        return Err(diag(format!(
            "file is {}, manifest says {}",
            puzzle.format(),
            entry.format
        )));
    }
    Ok(puzzle)
}

pub fn write_puzzle_file(path: &Path, puzzle: &Puzzle) -> Result<(), CorpusError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CorpusError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, serialize_puzzle(puzzle)).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{TextPair, TranslationQuestion};

    fn roundtrip(p: Puzzle) {
        let bytes = serialize_puzzle(&p);
        let parsed = parse_puzzle(&bytes).unwrap();
        assert_eq!(parsed, p);
        assert_eq!(serialize_puzzle(&parsed), bytes);
    }

    #[test]
    fn gilbertese_roundtrip() {
        let p = Puzzle::from(fixtures::gilbertese_rosetta());
        roundtrip(p.clone());
        let parsed = parse_puzzle(&serialize_puzzle(&p)).unwrap();
        let r = parsed.as_rosetta().unwrap();
        assert_eq!(r.given_pairs.len(), 10);
        assert_eq!(r.questions.len(), 2);
    }

    #[test]
    fn special_characters_survive_byte_exact() {
        let p = Puzzle::from(fixtures::polish_matchup());
        let bytes = serialize_puzzle(&p);
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.contains("kiełbasę"));
        assert!(text.contains("sąsiada"));
        roundtrip(p);
        let g = serialize_puzzle(&fixtures::gilbertese_rosetta().into());
        assert!(String::from_utf8(g).unwrap().contains("ŋkoe"));
    }

    #[test]
    fn minimal_rosetta_roundtrip() {
        let mut p = fixtures::gilbertese_rosetta();
        p.given_pairs.truncate(1);
        p.questions.clear();
        roundtrip(p.into());
    }

    #[test]
    fn canonical_layout() {
        let bytes = serialize_puzzle(&fixtures::polish_matchup().into());
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.ends_with("}\n"));
        assert!(!text.contains('\r'));
        assert!(text.starts_with("{\n  \"gold_key\": [\n    \"D\","));
        let keys: Vec<&str> = text
            .lines()
            .filter(|l| l.starts_with("  \"") && !l.starts_with("    "))
            .map(|l| l.trim_start().split('"').nth(1).unwrap())
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn zero_bytes_is_malformed() {
        assert!(matches!(
            parse_puzzle(b""),
            Err(ParseError::MalformedSyntax { line: 1, .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_puzzle(b"{\n  \"meta\": {,\n}").unwrap_err();
        match err {
            ParseError::MalformedSyntax { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_utf8_is_encoding_error() {
        assert_eq!(
            parse_puzzle(b"{\"a\": \"\xff\"}"),
            Err(ParseError::EncodingError { offset: 7 })
        );
    }

    #[test]
    fn schema_errors_name_the_field() {
        let mut v: Value = serde_json::from_slice(&serialize_puzzle(
            &fixtures::gilbertese_rosetta().into(),
        ))
        .unwrap();
        v["meta"].as_object_mut().unwrap().remove("year");
        let err = parse_puzzle(v.to_string().as_bytes()).unwrap_err();
        assert!(
            matches!(&err, ParseError::SchemaViolation { field, .. } if field == "meta"),
            "{err:?}"
        );

        let mut v: Value = serde_json::from_slice(&serialize_puzzle(
            &fixtures::gilbertese_rosetta().into(),
        ))
        .unwrap();
        v["pairs"][3]["source_text"] = Value::from(5);
        let err = parse_puzzle(v.to_string().as_bytes()).unwrap_err();
        assert!(
            matches!(&err, ParseError::SchemaViolation { field, .. } if field == "pairs[3].source_text"),
            "{err:?}"
        );

        let err = parse_puzzle(br#"{"meta": {}}"#).unwrap_err();
        assert!(matches!(&err, ParseError::SchemaViolation { field, .. } if field == "meta.format"));
    }

    #[test]
    fn validation_failures_are_schema_violations() {
        let mut p = fixtures::polish_matchup();
        p.gold_key = crate::label::AnswerKey::identity(6);
        let bytes = serialize_puzzle(&p.into());
        let err = parse_puzzle(&bytes).unwrap_err();
        assert!(matches!(&err, ParseError::SchemaViolation { field, .. } if field == "gold_key"));
    }

    #[test]
    fn parse_normalizes_to_nfc() {
        let mut p = fixtures::gilbertese_rosetta();
        p.given_pairs.push(TextPair::new("sa\u{0328}siada", "neighbour"));
        let value = serde_json::to_value(&p).unwrap();
        let parsed = parse_puzzle(value.to_string().as_bytes()).unwrap();
        assert_eq!(
            parsed.as_rosetta().unwrap().given_pairs[10].source_text,
            "sąsiada"
        );
    }

    #[test]
    fn extras_are_carried() {
        let mut p = fixtures::gilbertese_rosetta();
        p.extras.push("Explain how the future is marked.".into());
        p.questions.push(TranslationQuestion {
            direction: crate::model::Direction::ToTarget,
            prompt_text: "I takaakaro ŋai".into(),
            gold_answers: vec!["I am playing".into()],
        });
        roundtrip(p.into());
    }

    fn write_manifest(dir: &Path, entries: Vec<ManifestEntry>) -> PathBuf {
        let manifest = CorpusManifest {
            corpus_name: "test".into(),
            version: "0.1.0".into(),
            entries,
        };
        let path = dir.join("manifest.json");
        fs::write(&path, manifest.to_bytes()).unwrap();
        path
    }

    #[test]
    fn load_two_fixtures() {
        let dir = tempfile::tempdir().unwrap();
        let g: Puzzle = fixtures::gilbertese_rosetta().into();
        let p: Puzzle = fixtures::polish_matchup().into();
        write_puzzle_file(&dir.path().join("g.json"), &g).unwrap();
        write_puzzle_file(&dir.path().join("sub/p.json"), &p).unwrap();
        let path = write_manifest(
            dir.path(),
            vec![
                ManifestEntry::for_puzzle(&g, "g.json"),
                ManifestEntry::for_puzzle(&p, "sub/p.json"),
            ],
        );
        let corpus = load_corpus(&path).unwrap();
        assert_eq!(corpus.puzzles.len(), 2);
        assert!(corpus.diagnostics.is_empty());
        assert_eq!(corpus.puzzles[0], g);
        assert!(corpus.get("uklo-2015-polish").is_some());
    }

    #[test]
    fn missing_file_is_diagnosed() {
        let dir = tempfile::tempdir().unwrap();
        let g: Puzzle = fixtures::gilbertese_rosetta().into();
        let p: Puzzle = fixtures::polish_matchup().into();
        write_puzzle_file(&dir.path().join("g.json"), &g).unwrap();
        let path = write_manifest(
            dir.path(),
            vec![
                ManifestEntry::for_puzzle(&g, "g.json"),
                ManifestEntry::for_puzzle(&p, "missing.json"),
            ],
        );
        let corpus = load_corpus(&path).unwrap();
        assert_eq!(corpus.puzzles.len(), 1);
        assert_eq!(corpus.diagnostics.len(), 1);
        assert_eq!(corpus.diagnostics[0].puzzle_id, "uklo-2015-polish");
    }

    #[test]
    fn bad_files_and_mismatches_are_diagnosed() {
        let dir = tempfile::tempdir().unwrap();
        let g: Puzzle = fixtures::gilbertese_rosetta().into();
        fs::write(dir.path().join("bad.json"), b"{ nope").unwrap();
        write_puzzle_file(&dir.path().join("g.json"), &g).unwrap();
        let mut wrong_id = ManifestEntry::for_puzzle(&g, "g.json");
        wrong_id.puzzle_id = "other".into();
        let mut wrong_format = ManifestEntry::for_puzzle(&g, "g.json");
        wrong_format.puzzle_id = "third".into();
        wrong_format.format = PuzzleFormat::MatchUp;
        let mut bad = ManifestEntry::for_puzzle(&g, "bad.json");
        bad.puzzle_id = "bad".into();
        let path = write_manifest(dir.path(), vec![bad, wrong_id, wrong_format]);
        let corpus = load_corpus(&path).unwrap();
        assert!(corpus.puzzles.is_empty());
        let ids: Vec<&str> = corpus.diagnostics.iter().map(|d| d.puzzle_id.as_str()).collect();
        assert_eq!(ids, ["bad", "other", "third"]);
        assert!(corpus.diagnostics[0].message.contains("malformed syntax"));
    }

    #[test]
    fn duplicate_ids_are_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let g: Puzzle = fixtures::gilbertese_rosetta().into();
        let path = write_manifest(
            dir.path(),
            vec![
                ManifestEntry::for_puzzle(&g, "a.json"),
                ManifestEntry::for_puzzle(&g, "b.json"),
            ],
        );
        assert!(matches!(load_corpus(&path), Err(CorpusError::ManifestMalformed(_))));
    }

    #[test]
    fn missing_manifest() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_corpus(&dir.path().join("nope.json")),
            Err(CorpusError::ManifestNotFound(_))
        ));
    }

    #[test]
    fn manifest_version_must_be_semver() {
        let m = br#"{"corpus_name": "x", "version": "one", "entries": []}"#;
        assert!(matches!(CorpusManifest::parse(m), Err(CorpusError::ManifestMalformed(_))));
    }
}
