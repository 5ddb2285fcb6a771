// SPDX-License-Identifier: Apache-2.0

//! Running scripts on several solvers and classifying disagreements.

mod classify;
mod report;
mod solver;

pub use classify::{
    classify, comparison_groups, decide, judge_validation, needs_version_mode, parse_model, validate_model,
    validation_script, BugKind, Finding, Validation,
};
pub use report::{load_report, persist, BugReport, Provenance, ReportError, ReportMeta};
pub use solver::{
    default_crash_patterns, interpret, run_all, run_solver, run_solver_text, solver_input, Outcome, SolverCmd,
    SolverConfig, SolverConfigError, SolverVerdict, DEFAULT_TIMEOUT_S,
};

use crate::smtlib::Script;

/// Verdicts of one differential run plus the bugs they reveal.
#[derive(Debug, Clone)]
pub struct DiffOutcome {
    pub verdicts: Vec<(String, SolverVerdict)>,
    pub bugs: Vec<BugReport>,
}

/// Runs all solvers on `s` with models requested, then classifies.
pub fn differential(s: &Script, solvers: &[SolverCmd]) -> DiffOutcome {
    let verdicts = run_all(solvers, s, true);
    let bugs = classify(s, &verdicts, solvers)
        .iter()
        .map(|f| BugReport::from_finding(s, &verdicts, f))
        .collect();
    DiffOutcome { verdicts, bugs }
}
