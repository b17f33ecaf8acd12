//! Human solve sessions.
//!
//! State lives in an append-only JSONL log of events. The in-memory view is a
//! snapshot rebuilt from the log at startup and swapped on every write, so
//! readers never block on a writer. Scores are always produced by the core
//! scorer; a stored report can be recomputed from the stored answer.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use matchup_core::{
    score_matchup, score_rosetta, Direction, PredictedKey, Puzzle, RosettaAttempt,
    ScoreError, ScoreReport, TextPair,
};

/// Whether a solver may see scores. Blind sessions only ever get receipts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeedbackMode {
    #[default]
    Blind,
    AfterSubmit,
}

/// The answer part of a submission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Key(PredictedKey),
    Answers(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredSubmission {
    pub puzzle_id: String,
    pub answer: Answer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub started_at: Option<DateTime<Utc>>,
    pub submitted_at: DateTime<Utc>,
    pub report: ScoreReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSession {
    pub session_id: String,
    pub solver_display_name: String,
    pub puzzle_ids: Vec<String>,
    pub feedback_mode: FeedbackMode,
    pub created_at: DateTime<Utc>,
    /// Keyed by puzzle id; at most one per puzzle.
    pub submissions: BTreeMap<String, StoredSubmission>,
}

/// One line of the session log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    SessionCreated {
        session_id: String,
        solver_display_name: String,
        puzzle_ids: Vec<String>,
        feedback_mode: FeedbackMode,
        created_at: DateTime<Utc>,
    },
    Submission {
        session_id: String,
        #[serde(flatten)]
        submission: StoredSubmission,
    },
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("puzzle {0:?} is not available")]
    UnknownPuzzle(String),
    #[error("puzzle {puzzle_id:?} was already submitted in this session")]
    DuplicateSubmission { puzzle_id: String },
    #[error("malformed request: {0}")]
    Malformed(String),
    #[error("session holds both {rosetta:?} and its Match-Up conversion {matchup:?}")]
    PairConflict { rosetta: String, matchup: String },
    #[error("results are withheld in Blind mode")]
    FeedbackWithheld,
    #[error("puzzle {0:?} has no submission yet")]
    NotSubmitted(String),
    #[error("session log {path}: {message}")]
    Store { path: PathBuf, message: String },
}

impl SessionError {
    fn store(path: &Path, e: impl std::fmt::Display) -> Self {
        SessionError::Store {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub solver_display_name: String,
    pub puzzle_ids: Vec<String>,
    #[serde(default)]
    pub feedback_mode: Option<FeedbackMode>,
    /// Refuse sessions that contain a Rosetta puzzle and its own conversion.
    #[serde(default)]
    pub exclude_pairs: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmitRequest {
    #[serde(default)]
    pub key: Option<PredictedKey>,
    #[serde(default)]
    pub answers: Option<Vec<String>>,
    #[serde(default)]
    pub started_at: Option<DateTime<Utc>>,
}

/// Numbered source item of a Match-Up presentation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceItem {
    pub index: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetItem {
    pub label: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuestionView {
    pub index: usize,
    pub direction: Direction,
    pub prompt_text: String,
}

/// What a solver sees: no gold data, no seed, no link to a source puzzle.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "format")]
pub enum Presentation {
    MatchUp {
        puzzle_id: String,
        language_name: String,
        preamble: String,
        source_items: Vec<SourceItem>,
        target_items: Vec<TargetItem>,
        extras: Vec<String>,
    },
    RosettaStone {
        puzzle_id: String,
        language_name: String,
        preamble: String,
        given_pairs: Vec<TextPair>,
        questions: Vec<QuestionView>,
        extras: Vec<String>,
    },
}

pub fn present(puzzle: &Puzzle) -> Presentation {
    match puzzle {
        Puzzle::MatchUp(p) => Presentation::MatchUp {
            puzzle_id: p.meta.id.clone(),
            language_name: p.meta.language_name.clone(),
            preamble: p.preamble.clone(),
            source_items: p
                .source_items
                .iter()
                .enumerate()
                .map(|(i, t)| SourceItem {
                    index: i + 1,
                    text: t.clone(),
                })
                .collect(),
            target_items: p
                .target_items
                .iter()
                .enumerate()
                .map(|(i, t)| TargetItem {
                    label: matchup_core::Label::from_index(i).to_string(),
                    text: t.clone(),
                })
                .collect(),
            extras: p.extras.clone(),
        },
        Puzzle::Rosetta(p) => Presentation::RosettaStone {
            puzzle_id: p.meta.id.clone(),
            language_name: p.meta.language_name.clone(),
            preamble: p.preamble.clone(),
            given_pairs: p.given_pairs.clone(),
            questions: p
                .questions
                .iter()
                .enumerate()
                .map(|(i, q)| QuestionView {
                    index: i + 1,
                    direction: q.direction,
                    prompt_text: q.prompt_text.clone(),
                })
                .collect(),
            extras: p.extras.clone(),
        },
    }
}

/// Scores an answer with the core scorer. Shape errors become `Malformed`.
pub fn score_answer(puzzle: &Puzzle, answer: &Answer) -> Result<ScoreReport, SessionError> {
    let malformed = |e: ScoreError| SessionError::Malformed(e.to_string());
    match (puzzle, answer) {
        (Puzzle::MatchUp(p), Answer::Key(key)) => {
            if let Some((i, _)) = key.iter().find(|&(i, _)| i == 0 || i > p.n()) {
                return Err(SessionError::Malformed(format!(
                    "source index {i} is outside 1..={}",
                    p.n()
                )));
            }
            score_matchup(key, p).map_err(malformed)
        }
        (Puzzle::Rosetta(p), Answer::Answers(answers)) => {
            let attempt = RosettaAttempt {
                puzzle_id: p.meta.id.clone(),
                answers: answers.clone(),
            };
            score_rosetta(&attempt, p).map_err(malformed)
        }
        (Puzzle::MatchUp(_), Answer::Answers(_)) => Err(SessionError::Malformed(
            "Match-Up puzzles take a \"key\", not \"answers\"".into(),
        )),
        (Puzzle::Rosetta(_), Answer::Key(_)) => Err(SessionError::Malformed(
            "Rosetta Stone puzzles take \"answers\", not a \"key\"".into(),
        )),
    }
}

impl SubmitRequest {
    pub fn into_answer(self) -> Result<(Answer, Option<DateTime<Utc>>), SessionError> {
        match (self.key, self.answers) {
            (Some(k), None) => Ok((Answer::Key(k), self.started_at)),
            (None, Some(a)) => Ok((Answer::Answers(a), self.started_at)),
            (Some(_), Some(_)) => Err(SessionError::Malformed(
                "give either \"key\" or \"answers\", not both".into(),
            )),
            (None, None) => Err(SessionError::Malformed("submission needs \"key\" or \"answers\"".into())),
        }
    }
}

type Snapshot = Arc<BTreeMap<String, Arc<SolveSession>>>;

/// Applies one event to a session map. Replaying a log calls this per line.
fn apply(map: &mut BTreeMap<String, Arc<SolveSession>>, event: Event) -> Result<(), String> {
    match event {
        Event::SessionCreated {
            session_id,
            solver_display_name,
            puzzle_ids,
            feedback_mode,
            created_at,
        } => {
            if map.contains_key(&session_id) {
                return Err(format!("session {session_id} created twice"));
            }
            map.insert(
                session_id.clone(),
                Arc::new(SolveSession {
                    session_id,
                    solver_display_name,
                    puzzle_ids,
                    feedback_mode,
                    created_at,
                    submissions: BTreeMap::new(),
                }),
            );
        }
        Event::Submission {
            session_id,
            submission,
        } => {
            let session = map
                .get_mut(&session_id)
                .ok_or_else(|| format!("submission for unknown session {session_id}"))?;
            if session.submissions.contains_key(&submission.puzzle_id) {
                return Err(format!(
                    "second submission for {} in session {session_id}",
                    submission.puzzle_id
                ));
            }
            Arc::make_mut(session)
                .submissions
                .insert(submission.puzzle_id.clone(), submission);
        }
    }
    Ok(())
}

/// Reads every event in a session log, in order.
pub fn read_log(path: &Path) -> Result<Vec<Event>, SessionError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(SessionError::store(path, e)),
    };
    let mut events = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| SessionError::store(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let event = serde_json::from_str(&line)
            .map_err(|e| SessionError::store(path, format!("line {}: {e}", n + 1)))?;
        events.push(event);
    }
    Ok(events)
}

/// Rebuilds session state from a log.
pub fn replay(events: impl IntoIterator<Item = Event>) -> Result<BTreeMap<String, SolveSession>, String> {
    let mut map = BTreeMap::new();
    for e in events {
        apply(&mut map, e)?;
    }
    Ok(map
        .into_iter()
        .map(|(k, v)| (k, Arc::unwrap_or_clone(v)))
        .collect())
}

/// Stored submissions whose report differs from a fresh scorer run.
pub fn rescoring_mismatches(
    sessions: &BTreeMap<String, SolveSession>,
    puzzles: &HashMap<String, Puzzle>,
) -> Vec<String> {
    let mut bad = Vec::new();
    for s in sessions.values() {
        for sub in s.submissions.values() {
            let fresh = puzzles
                .get(&sub.puzzle_id)
                .ok_or_else(|| "puzzle missing".to_string())
                .and_then(|p| score_answer(p, &sub.answer).map_err(|e| e.to_string()));
            match fresh {
                Ok(r) if r == sub.report => {}
                Ok(_) => bad.push(format!("{}/{}: report differs", s.session_id, sub.puzzle_id)),
                Err(e) => bad.push(format!("{}/{}: {e}", s.session_id, sub.puzzle_id)),
            }
        }
    }
    bad
}

/// Sessions over a fixed puzzle set, persisted to a JSONL log.
pub struct SessionService {
    puzzles: HashMap<String, Puzzle>,
    default_feedback: FeedbackMode,
    path: PathBuf,
    log: Mutex<File>,
    snapshot: RwLock<Snapshot>,
}

impl SessionService {
    /// Opens (or creates) the log at `path` and replays it.
    pub fn open(
        path: &Path,
        puzzles: impl IntoIterator<Item = Puzzle>,
        default_feedback: FeedbackMode,
    ) -> Result<Self, SessionError> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| SessionError::store(path, e))?;
        }
        let mut map = BTreeMap::new();
        for e in read_log(path)? {
            apply(&mut map, e).map_err(|m| SessionError::store(path, m))?;
        }
        let log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| SessionError::store(path, e))?;
        Ok(SessionService {
            puzzles: puzzles.into_iter().map(|p| (p.id().to_string(), p)).collect(),
            default_feedback,
            path: path.to_path_buf(),
            log: Mutex::new(log),
            snapshot: RwLock::new(Arc::new(map)),
        })
    }

    pub fn puzzle(&self, id: &str) -> Option<&Puzzle> {
        self.puzzles.get(id)
    }

    pub fn puzzle_ids(&self) -> BTreeSet<&str> {
        self.puzzles.keys().map(String::as_str).collect()
    }

    pub fn snapshot(&self) -> Snapshot {
        self.snapshot.read().clone()
    }

    pub fn session(&self, id: &str) -> Result<Arc<SolveSession>, SessionError> {
        self.snapshot()
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::UnknownSession(id.to_string()))
    }

    /// Writes the event, then publishes the new snapshot. The log lock is
    /// held throughout so events land in the same order they are applied.
    fn commit(&self, event: Event, check: impl FnOnce(&BTreeMap<String, Arc<SolveSession>>) -> Result<(), SessionError>) -> Result<Snapshot, SessionError> {
        let mut log = self.log.lock();
        let mut next = (*self.snapshot()).clone();
        check(&next)?;
        apply(&mut next, event.clone()).map_err(|m| SessionError::store(&self.path, m))?;
        let mut line = serde_json::to_string(&event).map_err(|e| SessionError::store(&self.path, e))?;
        line.push('\n');
        log.write_all(line.as_bytes())
            .and_then(|_| log.flush())
            .map_err(|e| SessionError::store(&self.path, e))?;
        let next = Arc::new(next);
        *self.snapshot.write() = next.clone();
        Ok(next)
    }

    pub fn create(&self, req: CreateSession) -> Result<Arc<SolveSession>, SessionError> {
        let name = req.solver_display_name.trim();
        if name.is_empty() {
            return Err(SessionError::Malformed("solver_display_name is empty".into()));
        }
        if req.puzzle_ids.is_empty() {
            return Err(SessionError::Malformed("puzzle_ids is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for id in &req.puzzle_ids {
            if !seen.insert(id.as_str()) {
                return Err(SessionError::Malformed(format!("puzzle {id:?} listed twice")));
            }
            if !self.puzzles.contains_key(id) {
                return Err(SessionError::UnknownPuzzle(id.clone()));
            }
        }
        if req.exclude_pairs {
            for id in &req.puzzle_ids {
                if let Some(Puzzle::MatchUp(m)) = self.puzzles.get(id) {
                    if let Some(src) = m.source_puzzle_id.as_ref().filter(|s| seen.contains(s.as_str())) {
                        return Err(SessionError::PairConflict {
                            rosetta: src.clone(),
                            matchup: id.clone(),
                        });
                    }
                }
            }
        }
        let session_id = uuid::Uuid::new_v4().to_string();
        let event = Event::SessionCreated {
            session_id: session_id.clone(),
            solver_display_name: name.to_string(),
            puzzle_ids: req.puzzle_ids,
            feedback_mode: req.feedback_mode.unwrap_or(self.default_feedback),
            created_at: Utc::now(),
        };
        let snap = self.commit(event, |_| Ok(()))?;
        Ok(snap[&session_id].clone())
    }

    fn assigned_puzzle(&self, session: &SolveSession, puzzle_id: &str) -> Result<&Puzzle, SessionError> {
        if !session.puzzle_ids.iter().any(|p| p == puzzle_id) {
            return Err(SessionError::UnknownPuzzle(puzzle_id.to_string()));
        }
        self.puzzles
            .get(puzzle_id)
            .ok_or_else(|| SessionError::UnknownPuzzle(puzzle_id.to_string()))
    }

    pub fn presentation(&self, session_id: &str, puzzle_id: &str) -> Result<Presentation, SessionError> {
        let session = self.session(session_id)?;
        Ok(present(self.assigned_puzzle(&session, puzzle_id)?))
    }

    pub fn submit(
        &self,
        session_id: &str,
        puzzle_id: &str,
        req: SubmitRequest,
    ) -> Result<StoredSubmission, SessionError> {
        let session = self.session(session_id)?;
        let puzzle = self.assigned_puzzle(&session, puzzle_id)?;
        if session.submissions.contains_key(puzzle_id) {
            return Err(SessionError::DuplicateSubmission {
                puzzle_id: puzzle_id.to_string(),
            });
        }
        let (answer, started_at) = req.into_answer()?;
        let report = score_answer(puzzle, &answer)?;
        let submission = StoredSubmission {
            puzzle_id: puzzle_id.to_string(),
            answer,
            started_at,
            submitted_at: Utc::now(),
            report,
        };
        let event = Event::Submission {
            session_id: session_id.to_string(),
            submission: submission.clone(),
        };
        // A concurrent request may have stored a submission since the check above.
        self.commit(event, |map| match map.get(session_id) {
            Some(s) if s.submissions.contains_key(puzzle_id) => Err(SessionError::DuplicateSubmission {
                puzzle_id: puzzle_id.to_string(),
            }),
            _ => Ok(()),
        })?;
        Ok(submission)
    }

    pub fn result(&self, session_id: &str, puzzle_id: &str) -> Result<ScoreReport, SessionError> {
        let session = self.session(session_id)?;
        self.assigned_puzzle(&session, puzzle_id)?;
        if session.feedback_mode == FeedbackMode::Blind {
            return Err(SessionError::FeedbackWithheld);
        }
        session
            .submissions
            .get(puzzle_id)
            .map(|s| s.report.clone())
            .ok_or_else(|| SessionError::NotSubmitted(puzzle_id.to_string()))
    }
}
