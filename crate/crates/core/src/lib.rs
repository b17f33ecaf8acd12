//! Data model, corpus I/O, Rosetta-to-Match-Up conversion, scoring and the
//! baseline solver for linguistic-olympiad puzzles.

pub mod convert;
pub mod corpus;
pub mod fixtures;
pub mod label;
pub mod model;
pub mod rng;
pub mod score;
pub mod solver;
pub mod validate;

pub use convert::{convert, ConversionConfig, ConvertError, NotConvertible};
pub use corpus::{load_corpus, parse_puzzle, serialize_puzzle, Corpus, CorpusManifest, ParseError};
pub use label::{AnswerKey, Label, PredictedKey};
pub use model::{
    DifficultyLevel, Direction, MatchUpPuzzle, Puzzle, PuzzleFormat, PuzzleMeta, RosettaPuzzle,
    ScoreReport, TextPair, Topic, TranslationQuestion,
};
pub use score::{score_matchup, score_rosetta, RosettaAttempt, ScoreError, Stage};
