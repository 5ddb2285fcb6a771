// SPDX-License-Identifier: Apache-2.0

//! Seed corpus ingestion.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::difftest::{differential, SolverCmd};
use crate::smtlib::{check_script, parse_script, Script};

#[derive(Debug, Clone, PartialEq)]
pub struct Seed {
    pub path: PathBuf,
    pub script: Script,
}

/// Seeds that parsed and sort-checked at ingestion, in path order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeedCorpus {
    pub seeds: Vec<Seed>,
}

impl SeedCorpus {
    pub fn new(seeds: Vec<Seed>) -> Self {
        SeedCorpus { seeds }
    }

    /// Builds a corpus from in-memory scripts named `mem:<index>`.
    pub fn from_scripts(scripts: impl IntoIterator<Item = Script>) -> Self {
        SeedCorpus {
            seeds: scripts
                .into_iter()
                .enumerate()
                .map(|(i, script)| Seed {
                    path: PathBuf::from(format!("mem:{i}")),
                    script,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("empty corpus: no usable .smt2 seeds under {0}")]
    Empty(PathBuf),
}

/// Why a seed file was left out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skipped {
    pub path: PathBuf,
    pub reason: String,
}

fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), CorpusError> {
    let entries = std::fs::read_dir(dir).map_err(|source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for e in entries {
        let path = e
            .map_err(|source| CorpusError::Io {
                path: dir.to_path_buf(),
                source,
            })?
            .path();
        if path.is_dir() {
            walk(&path, out)?;
        } else if path.extension().is_some_and(|x| x == "smt2") {
            out.push(path);
        }
    }
    Ok(())
}

/// Recursively loads `.smt2` files under `dir`. Files that fail to parse
/// or sort-check are skipped with a warning.
pub fn ingest_seeds(dir: &Path) -> Result<(SeedCorpus, Vec<Skipped>), CorpusError> {
    let mut paths = Vec::new();
    walk(dir, &mut paths)?;
    paths.sort();
    let mut seeds = Vec::new();
    let mut skipped = Vec::new();
    for path in paths {
        let verdict = std::fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|text| parse_script(&text).map_err(|e| e.to_string()))
            .and_then(|s| check_script(&s).map(|_| s).map_err(|e| e.to_string()));
        match verdict {
            Ok(script) => seeds.push(Seed { path, script }),
            Err(reason) => {
                log::warn!("skipping seed {}: {reason}", path.display());
                skipped.push(Skipped { path, reason });
            }
        }
    }
    if seeds.is_empty() {
        return Err(CorpusError::Empty(dir.to_path_buf()));
    }
    Ok((SeedCorpus { seeds }, skipped))
}

/// Drops seeds that already expose a bug on `solvers`.
pub fn prefilter(corpus: SeedCorpus, solvers: &[SolverCmd]) -> (SeedCorpus, Vec<Skipped>) {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for seed in corpus.seeds {
        let out = differential(&seed.script, solvers);
        if out.bugs.is_empty() {
            kept.push(seed);
        } else {
            let kinds: Vec<String> = out.bugs.iter().map(|b| b.fingerprint.to_string()).collect();
            log::warn!(
                "excluding seed {}: already triggers {}",
                seed.path.display(),
                kinds.join(", ")
            );
            dropped.push(Skipped {
                path: seed.path,
                reason: format!("already triggers {}", kinds.join(", ")),
            });
        }
    }
    (SeedCorpus { seeds: kept }, dropped)
}
