// SPDX-License-Identifier: Apache-2.0

//! Deduplication, reduction and bisection of bug reports.

mod bisect;
mod db;
mod fingerprint;
mod reduce;

pub use bisect::{bisect_by, budget, load_manifest, BisectError, BisectResult, Build};
pub use db::{BugDatabase, DbError, DedupOutcome, Entry, StoredReport};
pub use fingerprint::{
    fingerprint_crash, fingerprint_finding, fingerprint_semantic, normalize_line, normalize_log, reproduces,
    Fingerprint,
};
pub use reduce::{interestingness_script, reduce, Reduction};

use crate::difftest::{differential, BugReport, SolverCmd};
use crate::smtlib::Script;

/// Whether running `candidate` on `solvers` reproduces bug `b`.
pub fn reproduces_on(b: &BugReport, candidate: &Script, solvers: &[SolverCmd]) -> bool {
    differential(candidate, solvers)
        .bugs
        .iter()
        .any(|c| reproduces(&b.fingerprint, &b.implicated, &c.fingerprint, &c.implicated))
}

/// Bisects `builds` by running `b.script` with each build substituted for
/// the implicated solver. Other configured solvers stay fixed, so
/// semantic bugs can still be compared.
pub fn bisect(b: &BugReport, builds: &[Build], solvers: &[SolverCmd]) -> Result<(String, BisectResult), BisectError> {
    let template = solvers
        .iter()
        .find(|s| s.name == b.implicated)
        .cloned()
        .unwrap_or_else(|| SolverCmd::new(b.implicated.clone(), ""));
    let result = bisect_by(builds.len(), |i| {
        let mut build = template.clone();
        build.cmd = builds[i].path.clone();
        build.version = builds[i].commit.clone();
        let set: Vec<SolverCmd> = solvers
            .iter()
            .map(|s| {
                if s.name == b.implicated {
                    build.clone()
                } else {
                    s.clone()
                }
            })
            .chain(solvers.iter().all(|s| s.name != b.implicated).then(|| build.clone()))
            .collect();
        reproduces_on(b, &b.script, &set)
    })?;
    Ok((builds[result.index].commit.clone(), result))
}
