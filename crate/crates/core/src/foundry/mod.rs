// SPDX-License-Identifier: Apache-2.0

//! Building theory grammars with a language model: draft a grammar from
//! documentation, complete it into a generator, then repair it against
//! sampling and solver feedback.

mod lm;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::difftest::{run_all, Outcome, SolverCmd};
use crate::smtlib::check_script;
use crate::termgen::{load_grammar, probe_script, sample_probes, TheoryGrammar};

pub use lm::{BackendError, GenParams, HttpBackend, LmBackend, LmError, Retry, StubBackend};

const FORMAT: &str = include_str!("../../templates/format.txt");
const SUMMARIZE: &str = include_str!("../../templates/summarize.txt");
const SYNTHESIZE: &str = include_str!("../../templates/synthesize.txt");
const CORRECT: &str = include_str!("../../templates/correct.txt");
const DISTILL: &str = include_str!("../../templates/distill.txt");

/// Documentation for one theory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoryDoc {
    pub theory_name: String,
    pub text: String,
    pub source: String,
}

#[derive(Debug, Error)]
pub enum FoundryError {
    #[error("{0}: documentation is empty")]
    EmptyDoc(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("no documentation files in {0}")]
    NoDocs(PathBuf),
    #[error("invalid foundry configuration: {0}")]
    Config(String),
    #[error("{source}")]
    Backend {
        source: BackendError,
        /// Iterations completed before the backend gave up, if the
        /// correction loop had started.
        partial: Option<Box<CorrectionReport>>,
    },
    #[error("no iteration produced a loadable grammar; last error: {last_error}")]
    NoValidGrammar {
        last_error: String,
        report: Box<CorrectionReport>,
    },
}

impl FoundryError {
    fn backend(source: BackendError) -> Self {
        FoundryError::Backend { source, partial: None }
    }

    /// Whatever the correction loop recorded before failing.
    pub fn report(&self) -> Option<&CorrectionReport> {
        match self {
            FoundryError::Backend { partial, .. } => partial.as_deref(),
            FoundryError::NoValidGrammar { report, .. } => Some(report),
            _ => None,
        }
    }
}

impl TheoryDoc {
    pub fn new(
        theory_name: impl Into<String>,
        text: impl Into<String>,
        source: impl Into<String>,
    ) -> Result<Self, FoundryError> {
        let doc = TheoryDoc {
            theory_name: theory_name.into(),
            text: text.into(),
            source: source.into(),
        };
        if doc.text.trim().is_empty() {
            return Err(FoundryError::EmptyDoc(doc.source));
        }
        Ok(doc)
    }
}

/// Every `.txt`/`.md`/`.smt2` file in `dir`, named after its file stem,
/// sorted by name.
pub fn load_docs(dir: &Path) -> Result<Vec<TheoryDoc>, FoundryError> {
    let io = |source| FoundryError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && matches!(p.extension().and_then(|e| e.to_str()), Some("txt" | "md" | "smt2")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(FoundryError::NoDocs(dir.to_path_buf()));
    }
    paths
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).map_err(|source| FoundryError::Io {
                path: p.clone(),
                source,
            })?;
            let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            TheoryDoc::new(name, text, p.display().to_string())
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct FoundryConfig {
    pub sample_num: usize,
    pub max_iter: usize,
    /// Probe validators; empty means the internal sort-checker alone decides.
    pub solvers: Vec<SolverCmd>,
    /// Seed of the sampling stream used at every iteration.
    pub sample_seed: u64,
    /// Ask the model to summarize errors instead of only deduplicating them.
    pub distill_with_lm: bool,
    pub params: GenParams,
    pub retry: Retry,
}

impl Default for FoundryConfig {
    fn default() -> Self {
        FoundryConfig {
            sample_num: 20,
            max_iter: 10,
            solvers: Vec::new(),
            sample_seed: 0,
            distill_with_lm: false,
            params: GenParams::default(),
            retry: Retry::default(),
        }
    }
}

impl FoundryConfig {
    pub fn validate(&self) -> Result<(), FoundryError> {
        if self.sample_num == 0 {
            return Err(FoundryError::Config("sample_num must be at least 1".into()));
        }
        if self.max_iter == 0 {
            return Err(FoundryError::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    /// Same configuration with no sleeping between retries.
    pub fn without_backoff(mut self) -> Self {
        self.retry.backoff = Duration::ZERO;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: usize,
    pub valid_count: usize,
    /// Deduplicated error messages seen while scoring this grammar.
    pub errors: Vec<String>,
    /// The grammar text exactly as the model returned it.
    pub grammar_snapshot: String,
    pub loaded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionReport {
    pub theory: Option<String>,
    pub sample_num: usize,
    pub iterations: Vec<IterationRecord>,
    /// Printed form of the retained grammar.
    pub final_grammar: Option<String>,
    pub best_iteration: Option<usize>,
    pub best_valid_count: usize,
    pub converged: bool,
}

/// Replaces each `{SLOT}` in `template`.
pub fn fill_template(template: &str, slots: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (name, value) in slots {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    out
}

/// Removes a surrounding markdown code fence, if any.
pub fn strip_fences(text: &str) -> &str {
    let t = text.trim();
    let Some(rest) = t.strip_prefix("```") else {
        return t;
    };
    let body = rest.split_once('\n').map_or("", |(_, b)| b);
    body.trim_end().strip_suffix("```").unwrap_or(body).trim()
}

/// Lowercased, digit runs folded to `#`, whitespace collapsed.
pub fn normalize_error(msg: &str) -> String {
    let lowered: String = msg
        .to_lowercase()
        .chars()
        .map(|c| if c.is_ascii_digit() { '#' } else { c })
        .collect();
    let mut out = String::with_capacity(lowered.len());
    for word in lowered.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    // Runs of # collapse so 12 and 1234 read the same.
    let mut dedup = String::with_capacity(out.len());
    for c in out.chars() {
        if !(c == '#' && dedup.ends_with('#')) {
            dedup.push(c);
        }
    }
    dedup
}

/// First occurrence of each normalized message, in order.
pub fn dedup_errors<I: IntoIterator<Item = String>>(errors: I) -> Vec<String> {
    let mut seen = BTreeSet::new();
    errors.into_iter().filter(|e| seen.insert(normalize_error(e))).collect()
}

pub fn summarize_cfg(doc: &TheoryDoc, lm: &dyn LmBackend, config: &FoundryConfig) -> Result<String, FoundryError> {
    let prompt = fill_template(SUMMARIZE, &[("DOC", &doc.text), ("FORMAT", FORMAT)]);
    config
        .retry
        .complete(lm, &prompt, &config.params)
        .map_err(FoundryError::backend)
}

pub fn synthesize_generator(
    cfg_text: &str,
    lm: &dyn LmBackend,
    config: &FoundryConfig,
) -> Result<String, FoundryError> {
    let prompt = fill_template(SYNTHESIZE, &[("CFG", cfg_text), ("FORMAT", FORMAT)]);
    config
        .retry
        .complete(lm, &prompt, &config.params)
        .map_err(FoundryError::backend)
}

/// Result of sampling one grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Score {
    pub valid_count: usize,
    pub errors: Vec<String>,
}

/// Samples `sample_num` probes and counts those the sort-checker accepts
/// and, when solvers are configured, at least one solver reads without a
/// parse error or crash.
pub fn score_grammar(g: &TheoryGrammar, config: &FoundryConfig) -> Score {
    let mut valid = 0;
    let mut errors = Vec::new();
    for probe in sample_probes(g, config.sample_num, config.sample_seed) {
        let term = match probe {
            Ok(t) => t,
            Err(e) => {
                errors.push(e.to_string());
                continue;
            }
        };
        let script = match probe_script(&term) {
            Ok(s) => s,
            Err(e) => {
                errors.push(e.to_string());
                continue;
            }
        };
        if let Err(e) = check_script(&script) {
            errors.push(e.to_string());
            continue;
        }
        if config.solvers.is_empty() {
            valid += 1;
            continue;
        }
        let runs = run_all(&config.solvers, &script, false);
        let accepted = runs.iter().any(|(_, v)| {
            matches!(
                v.outcome,
                Outcome::Sat { .. } | Outcome::Unsat | Outcome::Unknown | Outcome::Timeout
            )
        });
        if accepted {
            valid += 1;
        } else {
            errors.extend(runs.into_iter().filter_map(|(name, v)| match v.outcome {
                Outcome::ParseRejected { message } => Some(format!("{name}: {message}")),
                Outcome::Crash { excerpt, .. } => Some(format!("{name} crashed: {}", excerpt.trim())),
                _ => None,
            }));
        }
    }
    Score {
        valid_count: valid,
        errors: dedup_errors(errors),
    }
}

/// Repairs `grammar_text` until every sample is valid or `max_iter`
/// grammars have been scored. Returns the first grammar with the highest
/// score.
pub fn correct(
    grammar_text: &str,
    lm: &dyn LmBackend,
    config: &FoundryConfig,
) -> Result<(TheoryGrammar, CorrectionReport), FoundryError> {
    config.validate()?;
    let mut report = CorrectionReport {
        theory: None,
        sample_num: config.sample_num,
        iterations: Vec::new(),
        final_grammar: None,
        best_iteration: None,
        best_valid_count: 0,
        converged: false,
    };
    let mut best: Option<(TheoryGrammar, usize)> = None;
    let mut text = grammar_text.to_string();
    let mut last_error = String::new();

    for iteration in 1..=config.max_iter {
        let (grammar, score) = match load_grammar(strip_fences(&text)) {
            Ok(g) => {
                let s = score_grammar(&g, config);
                (Some(g), s)
            }
            Err(e) => (
                None,
                Score {
                    valid_count: 0,
                    errors: vec![e.to_string()],
                },
            ),
        };
        if let Some(e) = score.errors.last() {
            last_error = e.clone();
        }
        log::info!(
            "iteration {iteration}: {}/{} valid, {} distinct error(s)",
            score.valid_count,
            config.sample_num,
            score.errors.len()
        );
        report.iterations.push(IterationRecord {
            iteration,
            valid_count: score.valid_count,
            errors: score.errors.clone(),
            grammar_snapshot: text.clone(),
            loaded: grammar.is_some(),
        });
        if let Some(g) = grammar {
            let improves = best.as_ref().is_none_or(|(_, b)| score.valid_count > *b);
            if improves {
                report.best_iteration = Some(iteration);
                report.best_valid_count = score.valid_count;
                best = Some((g, score.valid_count));
            }
        }
        if score.valid_count == config.sample_num {
            report.converged = true;
            break;
        }
        if iteration == config.max_iter {
            break;
        }
        let errors = match distill(&score.errors, lm, config) {
            Ok(e) => e,
            Err(source) => {
                return Err(FoundryError::Backend {
                    source,
                    partial: Some(Box::new(finish(report, &best))),
                })
            }
        };
        let prompt = fill_template(
            CORRECT,
            &[("CFG", strip_fences(&text)), ("ERRORS", &errors), ("FORMAT", FORMAT)],
        );
        text = match config.retry.complete(lm, &prompt, &config.params) {
            Ok(t) => t,
            Err(source) => {
                return Err(FoundryError::Backend {
                    source,
                    partial: Some(Box::new(finish(report, &best))),
                })
            }
        };
    }

    let report = finish(report, &best);
    match best {
        Some((g, _)) => Ok((g, report)),
        None => Err(FoundryError::NoValidGrammar {
            last_error,
            report: Box::new(report),
        }),
    }
}

fn finish(mut report: CorrectionReport, best: &Option<(TheoryGrammar, usize)>) -> CorrectionReport {
    if let Some((g, _)) = best {
        report.theory = Some(g.theory_name.clone());
        report.final_grammar = Some(g.to_string());
    }
    report
}

fn distill(errors: &[String], lm: &dyn LmBackend, config: &FoundryConfig) -> Result<String, BackendError> {
    let listed = errors.iter().map(|e| format!("- {e}")).collect::<Vec<_>>().join("\n");
    if !config.distill_with_lm || errors.is_empty() {
        return Ok(listed);
    }
    let prompt = fill_template(DISTILL, &[("ERRORS", &listed)]);
    config.retry.complete(lm, &prompt, &config.params)
}

/// Summarize, synthesize, then correct one theory.
pub fn build_theory(
    doc: &TheoryDoc,
    lm: &dyn LmBackend,
    config: &FoundryConfig,
) -> Result<(TheoryGrammar, CorrectionReport), FoundryError> {
    config.validate()?;
    let cfg = summarize_cfg(doc, lm, config)?;
    let generator = synthesize_generator(strip_fences(&cfg), lm, config)?;
    let (g, mut report) = correct(&generator, lm, config)?;
    if g.theory_name != doc.theory_name {
        log::warn!("{}: grammar declares theory `{}`", doc.source, g.theory_name);
    }
    report.theory = Some(doc.theory_name.clone());
    Ok((g, report))
}

/// Builds every theory, each on its own thread with its own backend.
pub fn build_theories(
    docs: &[TheoryDoc],
    backends: Vec<Box<dyn LmBackend>>,
    config: &FoundryConfig,
) -> Vec<Result<(TheoryGrammar, CorrectionReport), FoundryError>> {
    assert_eq!(docs.len(), backends.len(), "one backend per theory");
    std::thread::scope(|scope| {
        let handles: Vec<_> = docs
            .iter()
            .zip(backends)
            .map(|(doc, lm)| scope.spawn(move || build_theory(doc, lm.as_ref(), config)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("theory build panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::termgen::BUILTIN_SOURCES;

    fn cfg() -> FoundryConfig {
        FoundryConfig::default().without_backoff()
    }

    fn ints_source() -> &'static str {
        BUILTIN_SOURCES.iter().find(|(n, _)| *n == "Ints.smtg").unwrap().1
    }

    #[test]
    fn templates_have_no_unfilled_slots() {
        let doc = TheoryDoc::new("Ints", "integers", "mem").unwrap();
        let stub = StubBackend::new(["x".to_string()]);
        summarize_cfg(&doc, &stub, &cfg()).unwrap();
        let p = &stub.prompts()[0];
        assert!(p.contains("integers") && p.contains("(grammar :theory"));
        for slot in ["{DOC}", "{CFG}", "{FORMAT}", "{ERRORS}"] {
            assert!(!p.contains(slot));
        }
    }

    #[test]
    fn summarize_passes_text_through() {
        let doc = TheoryDoc::new("Ints", "doc", "mem").unwrap();
        let stub = StubBackend::new([ints_source().to_string()]);
        assert_eq!(summarize_cfg(&doc, &stub, &cfg()).unwrap(), ints_source());
        let stub = StubBackend::new(["cfg".to_string()]);
        assert_eq!(synthesize_generator("draft", &stub, &cfg()).unwrap(), "cfg");
        assert!(stub.prompts()[0].contains("draft"));
    }

    #[test]
    fn transport_failure_reports_retries() {
        let doc = TheoryDoc::new("Ints", "doc", "mem").unwrap();
        let stub = StubBackend::failing("timed out", 3);
        match summarize_cfg(&doc, &stub, &cfg()) {
            Err(FoundryError::Backend { source, partial: None }) => assert_eq!(source.retries, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_doc_rejected() {
        assert!(matches!(
            TheoryDoc::new("X", "  \n", "f"),
            Err(FoundryError::EmptyDoc(_))
        ));
    }

    #[test]
    fn valid_grammar_needs_no_refinement() {
        let stub = StubBackend::new(Vec::<String>::new());
        let (g, report) = correct(ints_source(), &stub, &cfg()).unwrap();
        assert_eq!(g.theory_name, "Ints");
        assert_eq!(report.iterations.len(), 1);
        assert_eq!(report.iterations[0].valid_count, 20);
        assert!(report.converged);
        assert!(stub.prompts().is_empty());
    }

    #[test]
    fn unloadable_grammar_scores_zero_and_is_repaired() {
        let stub = StubBackend::new([format!("```\n{}\n```", ints_source())]);
        let (_, report) = correct("(grammar :start B)", &stub, &cfg()).unwrap();
        assert_eq!(report.iterations.len(), 2);
        assert_eq!(report.iterations[0].valid_count, 0);
        assert!(!report.iterations[0].loaded);
        assert_eq!(report.iterations[0].errors.len(), 1);
        assert!(stub.prompts()[0].contains(&report.iterations[0].errors[0]));
        assert_eq!(report.best_iteration, Some(2));
    }

    #[test]
    fn nothing_loads() {
        let stub = StubBackend::new(["nope".to_string()]);
        let c = FoundryConfig { max_iter: 2, ..cfg() };
        assert!(matches!(
            correct("junk", &stub, &c),
            Err(FoundryError::NoValidGrammar { .. })
        ));
    }

    #[test]
    fn backend_failure_keeps_partial_report() {
        let stub = StubBackend::failing("down", 3);
        match correct("junk", &stub, &cfg()) {
            Err(FoundryError::Backend { partial: Some(r), .. }) => assert_eq!(r.iterations.len(), 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lm_distillation_is_one_extra_call() {
        let stub = StubBackend::new(["- grammar is malformed".to_string(), ints_source().to_string()]);
        let c = FoundryConfig {
            distill_with_lm: true,
            ..cfg()
        };
        let (_, report) = correct("junk", &stub, &c).unwrap();
        assert!(report.converged);
        let prompts = stub.prompts();
        assert_eq!(prompts.len(), 2);
        assert!(prompts[1].contains("- grammar is malformed"));
    }

    #[test]
    fn error_normalization() {
        assert_eq!(normalize_error("Line 12:  Unbound  `x3`"), "line #: unbound `x#`");
        assert_eq!(
            dedup_errors(["unbound x1".to_string(), "Unbound X22".into(), "other".into()]),
            vec!["unbound x1".to_string(), "other".into()]
        );
    }

    #[test]
    fn fences_stripped() {
        assert_eq!(strip_fences("```lisp\n(a)\n```"), "(a)");
        assert_eq!(strip_fences("  (a) "), "(a)");
    }

    #[test]
    fn build_pipeline_with_stub() {
        let doc = TheoryDoc::new("Ints", "doc", "mem").unwrap();
        let stub = StubBackend::new(["draft".to_string(), ints_source().to_string()]);
        let (g, report) = build_theory(&doc, &stub, &cfg()).unwrap();
        assert_eq!(g.theory_name, "Ints");
        assert!(report.converged);
        assert_eq!(stub.remaining(), 0);
    }
}
