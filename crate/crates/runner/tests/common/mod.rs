#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use matchup_runner::config::RunConfig;

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

pub fn corpus_manifest(name: &str) -> PathBuf {
    repo_root().join("corpus").join(name)
}

/// A config in `dir` over the given manifest, with extra TOML appended.
pub fn config_in(dir: &Path, manifest: &Path, extra: &str) -> RunConfig {
    let text = format!(
        "manifest = {:?}\noutput_dir = \"out\"\n\n[seed]\npolicy = \"per_puzzle\"\nglobal_seed = 2025\n{extra}",
        manifest.to_str().unwrap()
    );
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    RunConfig::load(&path).unwrap()
}

/// Every file under `dir`, keyed by relative path.
pub fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}
