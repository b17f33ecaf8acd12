//! Zero-shot prompts, answer parsing and cached model queries.

pub mod cache;
pub mod client;
pub mod parse;
pub mod prompt;

pub use cache::{cache_key, CachedResponse, ResponseCache};
pub use client::{Client, ModelSpec, QueryError, Transport};
pub use parse::{parse_matchup_response, parse_rosetta_response, ParseFailure};
pub use prompt::build_prompt;
