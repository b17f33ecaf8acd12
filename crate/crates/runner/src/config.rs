//! Run configuration, read from TOML. Relative paths resolve against the
//! directory holding the config file.

use std::collections::BTreeSet;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use matchup_core::convert::ConversionConfig;
use matchup_core::rng::derive_puzzle_seed;
use matchup_core::score::Stage;
use matchup_core::solver::FeatureWeights;
use matchup_core::{PuzzleMeta, Topic};
use matchup_harness::ModelSpec;

use crate::sessions::FeedbackMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedPolicy {
    /// Every puzzle is shuffled with `global_seed` itself.
    Fixed,
    /// Each puzzle gets `splitmix64(global_seed ^ stable_hash(id))`.
    PerPuzzle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedConfig {
    #[serde(default = "default_policy")]
    pub policy: SeedPolicy,
    #[serde(default)]
    pub global_seed: u64,
    #[serde(default = "default_reshuffles")]
    pub max_reshuffles: u32,
}

fn default_policy() -> SeedPolicy {
    SeedPolicy::PerPuzzle
}

fn default_reshuffles() -> u32 {
    16
}

impl Default for SeedConfig {
    fn default() -> Self {
        SeedConfig {
            policy: default_policy(),
            global_seed: 0,
            max_reshuffles: default_reshuffles(),
        }
    }
}

impl SeedConfig {
    pub fn conversion_config(&self, puzzle_id: &str) -> ConversionConfig {
        let shuffle_seed = match self.policy {
            SeedPolicy::Fixed => self.global_seed,
            SeedPolicy::PerPuzzle => derive_puzzle_seed(self.global_seed, puzzle_id),
        };
        ConversionConfig {
            shuffle_seed,
            max_reshuffles: self.max_reshuffles,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Filters {
    /// Empty means every stage, including unstaged puzzles.
    #[serde(default)]
    pub stages: BTreeSet<Stage>,
    /// A puzzle passes when it carries at least one listed topic.
    #[serde(default)]
    pub topics: BTreeSet<Topic>,
}

impl Filters {
    pub fn accepts(&self, meta: &PuzzleMeta) -> bool {
        let stage_ok = self.stages.is_empty() || self.stages.contains(&Stage::of(&meta.difficulty_levels));
        let topic_ok = self.topics.is_empty() || meta.topics.iter().any(|t| self.topics.contains(t));
        stage_ok && topic_ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmConfig {
    /// Concurrent requests across puzzles.
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    /// Response cache; defaults to `<output_dir>/cache`.
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
}

fn default_concurrency() -> usize {
    4
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            concurrency: default_concurrency(),
            cache_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServeConfig {
    #[serde(default = "default_bind")]
    pub bind: SocketAddr,
    /// Append-only session log; defaults to `<output_dir>/sessions.jsonl`.
    #[serde(default)]
    pub session_store: Option<PathBuf>,
    #[serde(default)]
    pub static_dir: Option<PathBuf>,
    #[serde(default)]
    pub default_feedback: FeedbackMode,
}

fn default_bind() -> SocketAddr {
    "127.0.0.1:8080".parse().expect("valid address")
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig {
            bind: default_bind(),
            session_store: None,
            static_dir: None,
            default_feedback: FeedbackMode::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: SeedConfig,
    #[serde(default)]
    pub filters: Filters,
    #[serde(default)]
    pub models: Vec<ModelSpec>,
    #[serde(default)]
    pub solver: FeatureWeights,
    #[serde(default)]
    pub llm: LlmConfig,
    #[serde(default)]
    pub serve: ServeConfig,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: RunConfig = toml::from_str(text).context("invalid run config")?;
        resolve(base_dir, &mut config.manifest);
        resolve(base_dir, &mut config.output_dir);
        for p in [
            config.llm.cache_dir.as_mut(),
            config.serve.session_store.as_mut(),
            config.serve.static_dir.as_mut(),
        ]
        .into_iter()
        .flatten()
        {
            resolve(base_dir, p);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate().context("solver weights")?;
        if self.seed.max_reshuffles == 0 {
            bail!("seed.max_reshuffles must be at least 1");
        }
        if self.llm.concurrency == 0 {
            bail!("llm.concurrency must be at least 1");
        }
        let mut names = BTreeSet::new();
        for m in &self.models {
            m.validate().with_context(|| format!("model {}", m.model_name))?;
            if !names.insert(m.model_name.as_str()) {
                bail!("model {} is listed twice", m.model_name);
            }
        }
        Ok(())
    }

    /// Creates the output directory and checks that it accepts writes.
    pub fn ensure_output_dir(&self) -> Result<()> {
        fs::create_dir_all(&self.output_dir)
            .with_context(|| format!("creating {}", self.output_dir.display()))?;
        let probe = self.output_dir.join(".write-test");
        fs::write(&probe, b"")
            .with_context(|| format!("output directory {} is not writable", self.output_dir.display()))?;
        fs::remove_file(&probe).ok();
        Ok(())
    }

    pub fn converted_manifest(&self) -> PathBuf {
        self.output_dir.join("corpus").join("manifest.json")
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.llm.cache_dir.clone().unwrap_or_else(|| self.output_dir.join("cache"))
    }

    pub fn session_store(&self) -> PathBuf {
        self.serve
            .session_store
            .clone()
            .unwrap_or_else(|| self.output_dir.join("sessions.jsonl"))
    }

    pub fn predictions_dir(&self) -> PathBuf {
        self.output_dir.join("predictions")
    }

    pub fn scores_path(&self) -> PathBuf {
        self.output_dir.join("scores.jsonl")
    }
}
