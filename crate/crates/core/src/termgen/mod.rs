// SPDX-License-Identifier: Apache-2.0

//! Grammar-driven generation of well-sorted Boolean terms.

mod builtin;
mod generate;
mod grammar;
mod probe;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use builtin::{builtin_grammars, BUILTIN_SOURCES};
pub use generate::{adapt_variables, generate, renamed_decl, sort_prefix, GenerateError, GeneratedTerm};
pub use grammar::{load_grammar, GrammarError, Production, TheoryGrammar, WeightedProduction, DEFAULT_MAX_DEPTH};
pub use probe::{probe_script, sample_probes, Probe};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("duplicate grammar for theory `{0}`")]
pub struct DuplicateTheory(pub String);

/// Grammars with unique theory names, in insertion order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GeneratorSet {
    grammars: Vec<TheoryGrammar>,
}

impl GeneratorSet {
    pub fn new(grammars: Vec<TheoryGrammar>) -> Result<Self, DuplicateTheory> {
        let mut set = GeneratorSet::default();
        for g in grammars {
            set.push(g)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, g: TheoryGrammar) -> Result<(), DuplicateTheory> {
        if self.get(&g.theory_name).is_some() {
            return Err(DuplicateTheory(g.theory_name));
        }
        self.grammars.push(g);
        Ok(())
    }

    pub fn get(&self, theory: &str) -> Option<&TheoryGrammar> {
        self.grammars.iter().find(|g| g.theory_name == theory)
    }

    pub fn grammars(&self) -> &[TheoryGrammar] {
        &self.grammars
    }

    pub fn len(&self) -> usize {
        self.grammars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grammars.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.grammars.iter().map(|g| g.theory_name.as_str())
    }
}

#[derive(Debug, Error)]
pub enum GrammarDirError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Grammar { path: PathBuf, source: GrammarError },
    #[error("{path}: {source}")]
    Duplicate { path: PathBuf, source: DuplicateTheory },
    #[error("no .smtg files in {0}")]
    Empty(PathBuf),
}

/// Loads every `.smtg` file in `dir`, in file-name order.
pub fn load_grammar_dir(dir: &Path) -> Result<GeneratorSet, GrammarDirError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| GrammarDirError::Io { path, source }
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "smtg"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(GrammarDirError::Empty(dir.to_path_buf()));
    }
    let mut set = GeneratorSet::default();
    for path in paths {
        let text = std::fs::read_to_string(&path).map_err(io(&path))?;
        let g = load_grammar(&text).map_err(|source| GrammarDirError::Grammar {
            path: path.clone(),
            source,
        })?;
        set.push(g)
            .map_err(|source| GrammarDirError::Duplicate { path, source })?;
    }
    Ok(set)
}
