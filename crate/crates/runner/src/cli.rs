//! Command-line front end.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use matchup_harness::cache::ResponseCache;
use matchup_harness::Client;

use crate::config::RunConfig;
use crate::pipeline::{self, EvalOptions, ReportOptions};
use crate::sessions::SessionService;
use crate::stages::{balance, render_listing, stage_entries};
use crate::server;

#[derive(Debug, Parser)]
#[command(name = "matchup", version, about = "Convert, solve, score and report olympiad puzzles")]
pub struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write Match-Up conversions and a conversion summary.
    Convert(ConfigArg),
    /// Assign stages and optionally pick k puzzles per topic set and stage.
    Stages {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, value_name = "K")]
        balance: Option<usize>,
    },
    /// Run the baseline solver on every Match-Up puzzle.
    Solve {
        #[command(flatten)]
        config: ConfigArg,
        /// Also write per-feature similarity matrices as CSV.
        #[arg(long)]
        dump_matrices: bool,
    },
    /// Query the configured models on every puzzle.
    EvalLlm {
        #[command(flatten)]
        config: ConfigArg,
        /// Only these models (by model_name); default is all configured.
        #[arg(long = "model")]
        models: Vec<String>,
        /// Use cached responses only; never contact a provider.
        #[arg(long)]
        cache_only: bool,
    },
    /// Score all predictions into scores.jsonl.
    Score(ConfigArg),
    /// Build the topic × stage report from scores.
    Report {
        #[command(flatten)]
        config: ConfigArg,
        /// Scores file; defaults to <output_dir>/scores.jsonl.
        #[arg(long)]
        scores: Option<PathBuf>,
        /// Extra puzzle metadata (JSON array), may repeat.
        #[arg(long)]
        metadata: Vec<PathBuf>,
        /// Column order for solvers, comma separated.
        #[arg(long, value_delimiter = ',')]
        solver_order: Vec<String>,
    },
    /// Serve the solve-session API.
    Serve {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        bind: Option<SocketAddr>,
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

pub fn init_logging(verbose: u8) {
    let default = match verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .init();
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("plain data serializes"));
}

/// The converted corpus when `convert` has run, otherwise the configured one.
fn puzzles_for(config: &RunConfig) -> Result<Vec<matchup_core::Puzzle>> {
    if config.converted_manifest().exists() {
        return Ok(pipeline::load_converted(config)?.puzzles);
    }
    let corpus = matchup_core::load_corpus(&config.manifest)
        .with_context(|| format!("loading corpus {}", config.manifest.display()))?;
    Ok(corpus.puzzles)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Convert(c) => {
            let config = RunConfig::load(&c.config)?;
            let summary = pipeline::run_convert(&config)?;
            println!(
                "{} puzzles loaded, {} converted, {} not convertible, {} failed to load",
                summary.puzzles_loaded,
                summary.conversions.len(),
                summary.failures.len(),
                summary.load_errors.len()
            );
            for f in &summary.failures {
                println!("  {}: {}", f.puzzle_id, f.detail);
            }
        }
        Command::Stages { config, balance: k } => {
            let config = RunConfig::load(&config.config)?;
            let mut puzzles = puzzles_for(&config)?;
            puzzles.retain(|p| config.filters.accepts(p.meta()));
            let listing = balance(stage_entries(&puzzles), k);
            config.ensure_output_dir()?;
            let path = config.output_dir.join("stages.json");
            std::fs::write(&path, serde_json::to_string_pretty(&listing)? + "\n")
                .with_context(|| format!("writing {}", path.display()))?;
            print!("{}", render_listing(&listing));
        }
        Command::Solve {
            config,
            dump_matrices,
        } => {
            let config = RunConfig::load(&config.config)?;
            let records = pipeline::run_solve(&config, dump_matrices)?;
            println!("baseline solved {} puzzles", records.len());
        }
        Command::EvalLlm {
            config,
            models,
            cache_only,
        } => {
            let config = RunConfig::load(&config.config)?;
            let specs: Vec<_> = if models.is_empty() {
                config.models.clone()
            } else {
                let mut chosen = Vec::new();
                for name in &models {
                    match config.models.iter().find(|m| &m.model_name == name) {
                        Some(m) => chosen.push(m.clone()),
                        None => bail!("model {name:?} is not in the config"),
                    }
                }
                chosen
            };
            if specs.is_empty() {
                bail!("no models configured");
            }
            let client = Client::new(ResponseCache::new(config.cache_dir()));
            let results = pipeline::run_eval_llm(&config, &client, &specs, EvalOptions { cache_only })?;
            for (model, records) in results {
                let failed = records
                    .iter()
                    .filter(|r| matches!(r.prediction, pipeline::Prediction::Failed { .. }))
                    .count();
                println!("{model}: {} responses, {failed} without a response", records.len());
            }
        }
        Command::Score(c) => {
            let config = RunConfig::load(&c.config)?;
            let (_, summary) = pipeline::run_score(&config)?;
            print_json(&summary);
        }
        Command::Report {
            config,
            scores,
            metadata,
            solver_order,
        } => {
            let config = RunConfig::load(&config.config)?;
            let table = pipeline::run_report(
                &config,
                &ReportOptions {
                    scores,
                    metadata,
                    solver_order,
                },
            )?;
            print!("{}", table.to_markdown());
        }
        Command::Serve {
            config,
            bind,
            static_dir,
        } => {
            let config = RunConfig::load(&config.config)?;
            let puzzles = puzzles_for(&config)?;
            let svc = SessionService::open(&config.session_store(), puzzles, config.serve.default_feedback)?;
            let bind = bind.unwrap_or(config.serve.bind);
            let static_dir = static_dir.or(config.serve.static_dir.clone());
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(server::serve(Arc::new(svc), bind, static_dir.as_deref()))?;
        }
    }
    Ok(())
}
