// SPDX-License-Identifier: Apache-2.0

//! The campaign loop: workers pick seeds, chain mutations and hand each
//! mutant to the differential tester.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::corpus::SeedCorpus;
use super::mutate::{mutate_once, MutateError, MutationParams};
use crate::difftest::{differential, persist, BugReport, Provenance, ReportError, SolverCmd};
use crate::smtlib::Script;
use crate::termgen::GeneratorSet;
use crate::triage::{BugDatabase, DbError, DedupOutcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FuzzConfig {
    /// Length of each mutation chain.
    pub mutations_per_seed: usize,
    /// Per-run solver timeout; overrides the solver configuration.
    pub timeout_s: f64,
    pub p_remove: f64,
    pub p_adapt: f64,
    pub master_seed: u64,
    pub workers: usize,
    /// Where bug reports, the bug log and kept mutants go.
    pub out: Option<PathBuf>,
    /// Mutate the original seed at every step instead of chaining.
    pub independent: bool,
    /// Also write every mutant to `out/mutants`.
    pub keep_all: bool,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            mutations_per_seed: 10,
            timeout_s: 10.0,
            p_remove: 0.5,
            p_adapt: 0.75,
            master_seed: 0,
            workers: 1,
            out: None,
            independent: false,
            keep_all: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum FuzzError {
    #[error("invalid fuzz configuration: {0}")]
    Config(String),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("no generators loaded")]
    NoGenerators,
    #[error(transparent)]
    Db(#[from] DbError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl FuzzConfig {
    pub fn validate(&self) -> Result<(), FuzzError> {
        let bad = |m: &str| Err(FuzzError::Config(m.into()));
        if self.mutations_per_seed == 0 {
            return bad("mutations_per_seed must be at least 1");
        }
        if !(self.timeout_s > 0.0 && self.timeout_s.is_finite()) {
            return bad("timeout must be positive");
        }
        if !(0.0..=1.0).contains(&self.p_remove) || !(0.0..=1.0).contains(&self.p_adapt) {
            return bad("probabilities must lie in [0, 1]");
        }
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        Ok(())
    }

    pub fn params(&self) -> MutationParams {
        MutationParams {
            p_remove: self.p_remove,
            p_adapt: self.p_adapt,
        }
    }
}

/// The rng of worker `worker`: the master seed with the worker id as
/// stream number.
pub fn worker_rng(master_seed: u64, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(worker as u64);
    rng
}

/// One mutation attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct Mutant {
    pub worker: usize,
    pub seed_index: usize,
    /// Position within the chain, from 0.
    pub iteration: usize,
    pub input: Script,
    pub output: Result<Script, MutateError>,
}

/// Endless, deterministic sequence of mutation attempts for one worker.
/// A chain ends early when its input has no atoms left.
pub struct MutantStream<'a> {
    gens: &'a GeneratorSet,
    corpus: &'a SeedCorpus,
    params: MutationParams,
    chain_len: usize,
    independent: bool,
    worker: usize,
    rng: ChaCha8Rng,
    current: Option<(usize, usize, Script)>,
}

impl<'a> MutantStream<'a> {
    pub fn new(gens: &'a GeneratorSet, corpus: &'a SeedCorpus, cfg: &FuzzConfig, worker: usize) -> Self {
        MutantStream {
            gens,
            corpus,
            params: cfg.params(),
            chain_len: cfg.mutations_per_seed.max(1),
            independent: cfg.independent,
            worker,
            rng: worker_rng(cfg.master_seed, worker),
            current: None,
        }
    }
}

impl Iterator for MutantStream<'_> {
    type Item = Mutant;

    fn next(&mut self) -> Option<Mutant> {
        if self.corpus.is_empty() {
            return None;
        }
        let (seed_index, iteration, input) = match self.current.take() {
            Some(c) => c,
            None => {
                let i = self.rng.random_range(0..self.corpus.len());
                (i, 0, self.corpus.seeds[i].script.clone())
            }
        };
        let output = mutate_once(&input, self.gens, &mut self.rng, &self.params);
        let next_iter = iteration + 1;
        if next_iter < self.chain_len && !matches!(output, Err(MutateError::NoAtoms(_))) {
            let next_input = match (&output, self.independent) {
                (_, true) => self.corpus.seeds[seed_index].script.clone(),
                (Ok(m), false) => m.clone(),
                (Err(_), false) => input.clone(),
            };
            self.current = Some((seed_index, next_iter, next_input));
        }
        Some(Mutant {
            worker: self.worker,
            seed_index,
            iteration,
            input,
            output,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzStats {
    pub mutants: u64,
    pub failed_mutations: u64,
    /// Solver outcome label → count.
    pub verdicts: BTreeMap<String, u64>,
    pub bugs: u64,
    pub unique_bugs: u64,
}

/// What the loop reports as it goes.
#[derive(Debug)]
pub enum FuzzEvent<'a> {
    Mutant(&'a Mutant),
    Bug {
        report: &'a BugReport,
        dedup: &'a DedupOutcome,
        dir: Option<&'a PathBuf>,
    },
}

/// A campaign over fixed generators, corpus and solvers. Statistics and
/// the bug database are the only state shared between workers.
pub struct Fuzzer<'a> {
    gens: &'a GeneratorSet,
    corpus: &'a SeedCorpus,
    solvers: Vec<SolverCmd>,
    cfg: FuzzConfig,
    stats: Mutex<FuzzStats>,
    db: Mutex<BugDatabase>,
    stop: AtomicBool,
    issued: AtomicU64,
}

impl<'a> Fuzzer<'a> {
    pub fn new(
        gens: &'a GeneratorSet,
        corpus: &'a SeedCorpus,
        solvers: &[SolverCmd],
        cfg: FuzzConfig,
    ) -> Result<Self, FuzzError> {
        cfg.validate()?;
        if corpus.is_empty() {
            return Err(FuzzError::EmptyCorpus);
        }
        if gens.is_empty() {
            return Err(FuzzError::NoGenerators);
        }
        let db = match &cfg.out {
            Some(out) => {
                std::fs::create_dir_all(out).map_err(|source| FuzzError::Io {
                    path: out.clone(),
                    source,
                })?;
                BugDatabase::open(&out.join("bugs.jsonl"))?
            }
            None => BugDatabase::in_memory(),
        };
        let solvers = solvers
            .iter()
            .cloned()
            .map(|mut s| {
                s.timeout_s = cfg.timeout_s;
                s
            })
            .collect();
        Ok(Fuzzer {
            gens,
            corpus,
            solvers,
            cfg,
            stats: Mutex::new(FuzzStats::default()),
            db: Mutex::new(db),
            stop: AtomicBool::new(false),
            issued: AtomicU64::new(0),
        })
    }

    /// Asks every worker to finish its current mutant and return.
    pub fn stop(&self) {
        self.stop.store(true, Ordering::SeqCst);
    }

    pub fn stats(&self) -> FuzzStats {
        self.stats.lock().expect("stats lock").clone()
    }

    pub fn database(&self) -> std::sync::MutexGuard<'_, BugDatabase> {
        self.db.lock().expect("db lock")
    }

    /// Runs until [`Fuzzer::stop`] is called or `limit` mutation attempts
    /// have been made across all workers. Returns every bug found.
    pub fn run(&self, limit: Option<u64>, on_event: &(dyn Fn(&FuzzEvent) + Sync)) -> Result<Vec<BugReport>, FuzzError> {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..self.cfg.workers)
                .map(|w| scope.spawn(move || self.worker(w, limit, on_event)))
                .collect();
            let mut bugs = Vec::new();
            let mut first_err = None;
            for h in handles {
                match h.join().expect("fuzz worker panicked") {
                    Ok(mut b) => bugs.append(&mut b),
                    Err(e) => {
                        self.stop();
                        first_err.get_or_insert(e);
                    }
                }
            }
            match first_err {
                Some(e) => Err(e),
                None => Ok(bugs),
            }
        })
    }

    fn worker(
        &self,
        worker: usize,
        limit: Option<u64>,
        on_event: &(dyn Fn(&FuzzEvent) + Sync),
    ) -> Result<Vec<BugReport>, FuzzError> {
        let mut stream = MutantStream::new(self.gens, self.corpus, &self.cfg, worker);
        let mut bugs = Vec::new();
        let mut kept = 0u64;
        while !self.stop.load(Ordering::SeqCst) {
            if let Some(limit) = limit {
                if self.issued.fetch_add(1, Ordering::SeqCst) >= limit {
                    break;
                }
            }
            let Some(m) = stream.next() else { break };
            on_event(&FuzzEvent::Mutant(&m));
            let script = match &m.output {
                Ok(s) => s,
                Err(e) => {
                    log::debug!("worker {worker}: mutation failed: {e}");
                    self.stats.lock().expect("stats lock").failed_mutations += 1;
                    continue;
                }
            };
            if self.cfg.keep_all {
                if let Some(out) = &self.cfg.out {
                    let dir = out.join("mutants");
                    let path = dir.join(format!("w{worker}-{kept:06}.smt2"));
                    std::fs::create_dir_all(&dir)
                        .and_then(|_| std::fs::write(&path, format!("{script}\n")))
                        .map_err(|source| FuzzError::Io { path, source })?;
                    kept += 1;
                }
            }
            if self.solvers.is_empty() {
                self.stats.lock().expect("stats lock").mutants += 1;
                continue;
            }
            let outcome = differential(script, &self.solvers);
            {
                let mut st = self.stats.lock().expect("stats lock");
                st.mutants += 1;
                for (_, v) in &outcome.verdicts {
                    *st.verdicts.entry(v.outcome.label().to_string()).or_default() += 1;
                }
            }
            for mut report in outcome.bugs {
                report.provenance = Some(Provenance {
                    master_seed: self.cfg.master_seed,
                    worker,
                    seed_file: self.corpus.seeds[m.seed_index].path.display().to_string(),
                    iteration: m.iteration,
                });
                let dir = match &self.cfg.out {
                    Some(out) => Some(persist(&report, out, &self.solvers)?),
                    None => None,
                };
                let dedup = self.db.lock().expect("db lock").dedup(&report)?;
                {
                    let mut st = self.stats.lock().expect("stats lock");
                    st.bugs += 1;
                    if matches!(dedup, DedupOutcome::New { .. }) {
                        st.unique_bugs += 1;
                    }
                }
                on_event(&FuzzEvent::Bug {
                    report: &report,
                    dedup: &dedup,
                    dir: dir.as_ref(),
                });
                bugs.push(report);
            }
        }
        Ok(bugs)
    }
}

/// Runs a campaign for at most `limit` mutation attempts.
pub fn fuzz(
    gens: &GeneratorSet,
    corpus: &SeedCorpus,
    solvers: &[SolverCmd],
    cfg: FuzzConfig,
    limit: Option<u64>,
) -> Result<(Vec<BugReport>, FuzzStats), FuzzError> {
    let f = Fuzzer::new(gens, corpus, solvers, cfg)?;
    let bugs = f.run(limit, &|_| {})?;
    Ok((bugs, f.stats()))
}

/// Rates derived from two snapshots of the statistics.
pub fn stats_line(stats: &FuzzStats, elapsed: Duration) -> String {
    let secs = elapsed.as_secs_f64().max(1e-9);
    let v = |k: &str| stats.verdicts.get(k).copied().unwrap_or(0);
    format!(
        "{:.1} mutants/s | mutants {} | sat {} unsat {} unknown {} timeout {} crash {} | bugs {} ({} unique)",
        stats.mutants as f64 / secs,
        stats.mutants,
        v("sat"),
        v("unsat"),
        v("unknown"),
        v("timeout"),
        v("crash"),
        stats.bugs,
        stats.unique_bugs
    )
}

/// Calls `report` with the current statistics every `every` until `f`
/// finishes running, then returns what `f` returned.
pub fn with_progress<T>(
    fuzzer: &Fuzzer<'_>,
    every: Duration,
    report: impl Fn(&FuzzStats, Duration) + Send + Sync,
    f: impl FnOnce() -> T,
) -> T {
    let done = AtomicBool::new(false);
    let start = Instant::now();
    std::thread::scope(|scope| {
        scope.spawn(|| {
            let tick = Duration::from_millis(100).min(every);
            let mut next = every;
            while !done.load(Ordering::SeqCst) {
                std::thread::sleep(tick);
                if start.elapsed() >= next {
                    report(&fuzzer.stats(), start.elapsed());
                    next += every;
                }
            }
        });
        let out = f();
        done.store(true, Ordering::SeqCst);
        out
    })
}
