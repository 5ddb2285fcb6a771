// SPDX-License-Identifier: Apache-2.0

//! Discrepancy detection and model validation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::solver::{run_all, Outcome, SolverCmd, SolverVerdict};
use crate::smtlib::sexp::read_all;
use crate::smtlib::{parse_command, script_theories, Command, Script, Sexp, Term, Theory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BugKind {
    Crash,
    Soundness,
    InvalidModel,
}

impl std::fmt::Display for BugKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BugKind::Crash => "crash",
            BugKind::Soundness => "soundness",
            BugKind::InvalidModel => "invalid_model",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Validation {
    Confirmed,
    Refuted,
    Inconclusive,
}

/// A bug decided from verdicts alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub kind: BugKind,
    pub implicated: String,
}

/// The classification decision. `validate(producer, model)` judges the
/// model a Sat solver returned; Sat verdicts without a model count as
/// inconclusive.
pub fn decide(verdicts: &[(String, Outcome)], mut validate: impl FnMut(&str, &str) -> Validation) -> Vec<Finding> {
    let crashes: Vec<Finding> = verdicts
        .iter()
        .filter(|(_, o)| matches!(o, Outcome::Crash { .. }))
        .map(|(n, _)| Finding {
            kind: BugKind::Crash,
            implicated: n.clone(),
        })
        .collect();
    if !crashes.is_empty() {
        return crashes;
    }
    let unsat: Vec<&String> = verdicts
        .iter()
        .filter(|(_, o)| *o == Outcome::Unsat)
        .map(|(n, _)| n)
        .collect();
    let sat: Vec<(&String, Option<&String>)> = verdicts
        .iter()
        .filter_map(|(n, o)| match o {
            Outcome::Sat { model } => Some((n, model.as_ref())),
            _ => None,
        })
        .collect();
    if unsat.is_empty() || sat.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut soundness_filed = false;
    for (producer, model) in sat {
        let v = model.map_or(Validation::Inconclusive, |m| validate(producer, m));
        match v {
            Validation::Confirmed if !soundness_filed => {
                soundness_filed = true;
                out.extend(unsat.iter().map(|n| Finding {
                    kind: BugKind::Soundness,
                    implicated: (*n).clone(),
                }));
            }
            Validation::Refuted => out.push(Finding {
                kind: BugKind::InvalidModel,
                implicated: producer.clone(),
            }),
            _ => {}
        }
    }
    out
}

/// Combines validation runs: all Sat confirms; Unknown or Timeout leaves
/// it open; Unsat from the producer or from everyone refutes. Rejections
/// and crashes of validators are ignored.
pub fn judge_validation(producer: &str, runs: &[(String, Outcome)]) -> Validation {
    let decisive: Vec<&(String, Outcome)> = runs
        .iter()
        .filter(|(_, o)| !matches!(o, Outcome::ParseRejected { .. } | Outcome::Crash { .. }))
        .collect();
    if decisive.is_empty() {
        return Validation::Inconclusive;
    }
    if decisive.iter().all(|(_, o)| o.is_sat()) {
        return Validation::Confirmed;
    }
    if decisive
        .iter()
        .any(|(_, o)| matches!(o, Outcome::Unknown | Outcome::Timeout))
    {
        return Validation::Inconclusive;
    }
    let producer_unsat = decisive.iter().any(|(n, o)| n == producer && *o == Outcome::Unsat);
    if producer_unsat || decisive.iter().all(|(_, o)| *o == Outcome::Unsat) {
        return Validation::Refuted;
    }
    Validation::Inconclusive
}

/// `define-fun`/`declare-fun` commands of a model. A `(model ...)`
/// wrapper or a bare parenthesized list is stripped.
pub fn parse_model(text: &str) -> Option<Vec<Command>> {
    let forms = read_all(text).ok()?;
    let items: Vec<Sexp> = match forms.as_slice() {
        [single] => match single.as_list() {
            Some([head, rest @ ..]) if head.as_symbol() == Some("model") => rest.to_vec(),
            Some(list) if list.iter().all(|x| x.as_list().is_some()) => list.to_vec(),
            _ => forms.clone(),
        },
        _ => forms.clone(),
    };
    items
        .iter()
        .map(|form| match parse_command(form).ok()?? {
            c @ (Command::DefineFun(..) | Command::DeclareFun(..) | Command::DeclareConst(..)) => Some(c),
            _ => None,
        })
        .collect()
}

/// `s` with each declaration that has a model definition replaced by it.
/// Model-only declarations (e.g. universe elements) follow the last sort
/// declaration, or precede the first command otherwise.
pub fn validation_script(s: &Script, model: &[Command]) -> Option<Script> {
    let defs: BTreeMap<&str, &Command> = model
        .iter()
        .filter(|c| matches!(c, Command::DefineFun(..)))
        .filter_map(|c| c.declared_symbol().map(|n| (n, c)))
        .collect();
    let extra: Vec<Command> = model
        .iter()
        .filter(|c| !matches!(c, Command::DefineFun(..)))
        .filter(|c| c.declared_symbol().is_some_and(|n| !s.decls().contains(n)))
        .cloned()
        .collect();
    let mut cmds: Vec<Command> = s
        .commands()
        .iter()
        .filter(|c| !matches!(c, Command::GetModel | Command::SetOption(..)))
        .map(|c| match c {
            Command::DeclareFun(n, ..) | Command::DeclareConst(n, _) if defs.contains_key(n.as_str()) => {
                defs[n.as_str()].clone()
            }
            other => other.clone(),
        })
        .collect();
    let is_sort_decl = |c: &Command| {
        matches!(
            c,
            Command::DeclareSort(..) | Command::DeclareDatatype(_) | Command::DeclareDatatypes(_)
        )
    };
    let at = match cmds.iter().rposition(is_sort_decl) {
        Some(i) => i + 1,
        None => cmds
            .iter()
            .position(|c| !matches!(c, Command::SetLogic(_)))
            .unwrap_or(cmds.len()),
    };
    cmds.splice(at..at, extra);
    Script::new(cmds).ok()
}

/// Re-runs `solvers` on `s` with the model substituted in.
pub fn validate_model(s: &Script, model_text: &str, producer: &str, solvers: &[SolverCmd]) -> Validation {
    let Some(model) = parse_model(model_text) else {
        log::warn!("unparseable model from {producer}; treating as inconclusive");
        return Validation::Inconclusive;
    };
    let Some(vs) = validation_script(s, &model) else {
        log::warn!("model from {producer} conflicts with the script's declarations");
        return Validation::Inconclusive;
    };
    let runs: Vec<(String, Outcome)> = run_all(solvers, &vs, false)
        .into_iter()
        .map(|(n, v)| (n, v.outcome))
        .collect();
    judge_validation(producer, &runs)
}

const STANDARD_COMMANDS: &[&str] = &[
    "push",
    "pop",
    "reset",
    "reset-assertions",
    "exit",
    "echo",
    "get-value",
    "get-info",
    "get-option",
    "get-assertions",
    "get-assignment",
    "get-proof",
    "get-unsat-core",
    "get-unsat-assumptions",
    "check-sat-assuming",
    "define-sort",
    "define-fun-rec",
    "define-funs-rec",
    "define-const",
    "declare-datatypes",
    "declare-datatype",
];

/// Whether `s` relies on solver-specific syntax, so only versions of the
/// same solver can be compared.
pub fn needs_version_mode(s: &Script) -> bool {
    // Symbols and sorts outside the standard theories, other than sorts the
    // script declares itself.
    let nonstandard = script_theories(s).iter().any(|t| match t {
        Theory::Other(name) => s.decls().sort_arity(name).is_none(),
        _ => false,
    });
    nonstandard
        || s.commands().iter().any(|c| match c {
            Command::Passthrough(form) => !form
                .as_list()
                .and_then(|l| l.first())
                .and_then(Sexp::as_symbol)
                .is_some_and(|h| STANDARD_COMMANDS.contains(&h)),
            other => other.terms().into_iter().any(|t| {
                let mut opaque = false;
                t.walk(&mut |n| opaque |= matches!(n, Term::Opaque(_)));
                opaque
            }),
        })
}

/// Groups of solver names whose verdicts are compared with each other.
pub fn comparison_groups(s: &Script, solvers: &[SolverCmd]) -> Vec<Vec<String>> {
    if !needs_version_mode(s) {
        return vec![solvers.iter().map(|c| c.name.clone()).collect()];
    }
    let mut groups: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for c in solvers {
        groups.entry(c.family()).or_default().push(c.name.clone());
    }
    groups.into_values().collect()
}

/// Findings for `s` given its verdicts. Sat models are validated by the
/// solvers of the same comparison group.
pub fn classify(s: &Script, verdicts: &[(String, SolverVerdict)], solvers: &[SolverCmd]) -> Vec<Finding> {
    let mut out: Vec<Finding> = Vec::new();
    for group in comparison_groups(s, solvers) {
        let members: Vec<(String, Outcome)> = verdicts
            .iter()
            .filter(|(n, _)| group.contains(n))
            .map(|(n, v)| (n.clone(), v.outcome.clone()))
            .collect();
        let validators: Vec<SolverCmd> = solvers.iter().filter(|c| group.contains(&c.name)).cloned().collect();
        for f in decide(&members, |producer, model| {
            validate_model(s, model, producer, &validators)
        }) {
            if !out.contains(&f) {
                out.push(f);
            }
        }
    }
    // Verdicts from solvers outside the configuration can still crash.
    for (n, v) in verdicts {
        if matches!(v.outcome, Outcome::Crash { .. }) && !solvers.iter().any(|c| &c.name == n) {
            let f = Finding {
                kind: BugKind::Crash,
                implicated: n.clone(),
            };
            if !out.contains(&f) {
                out.push(f);
            }
        }
    }
    out
}
