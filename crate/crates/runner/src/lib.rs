//! Experiment pipeline and solve-session service for olympiad puzzles.

pub mod cli;
pub mod config;
pub mod pipeline;
pub mod report;
pub mod server;
pub mod sessions;
pub mod stages;
