// SPDX-License-Identifier: Apache-2.0

//! Fixtures shared by the integration tests: literal scripts, sh-based
//! mock solvers and a generated script corpus.

#![allow(dead_code)]

use std::collections::HashSet;
use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skelfuzz::difftest::SolverCmd;
use skelfuzz::smtlib::{fresh_name, parse_script, rename_free, Command, Script, Term};
use skelfuzz::termgen::{builtin_grammars, generate, renamed_decl};

pub const SEQ_EXISTS: &str = "(declare-fun s () (Seq Int))
(assert (exists ((f Int))
 (distinct (seq.len (seq.rev s))
 (seq.nth (as seq.empty (Seq Int)) (div 0 0)))))
(check-sat)";

pub const INT_OR_SEED: &str = "(declare-fun T () Int)
(assert (or (= T 0) (< T 1)))
(check-sat)";

/// The synthesized script, with the declaration of the fresh string
/// variable that makes it well-formed.
pub const INT_OR_MUTANT: &str = "(declare-fun T () Int)
(declare-fun str1 () String)
(assert (or ((_ divisible 3) (mod T 3)) (= str1 \"\")))
(check-sat)";

pub const FINITE_FIELD: &str = "(set-logic QF_FF)
(declare-const v (_ FiniteField 3))
(assert (= v (ff.bitsum (ff.mul v v)
        (as ff-1 (_ FiniteField 3)))))
(check-sat)";

pub const REL_JOIN: &str = "(declare-fun s () (Set UnitTuple))
(assert (rel.join s (as set.empty (Set UnitTuple))))";

pub const REAL_MOD: &str = "(declare-const x15 Bool)
(declare-const x Real)
(declare-const x1 Real)
(declare-const x9 Bool)
(declare-fun v () Real)
(assert (forall ((r Real)) (or x9
(or (= (+ r 1.0) (mod 0 (to_int x)))))))
(assert (and (> 0.0 x1)
(< x (/ 1.0 (* v x))) (<= 0.0 (/ 0 v))))
(check-sat)";

pub const LITERAL_FIXTURES: &[(&str, &str)] = &[
    ("seq_exists", SEQ_EXISTS),
    ("int_or_seed", INT_OR_SEED),
    ("int_or_mutant", INT_OR_MUTANT),
    ("finite_field", FINITE_FIELD),
    ("rel_join", REL_JOIN),
    ("real_mod", REAL_MOD),
];

/// What a mock solver does with one input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Act {
    Sat(&'static str),
    Unsat,
    Unknown,
    Timeout,
    Reject,
    Crash,
}

impl Act {
    fn sh(&self) -> String {
        match self {
            Act::Sat(model) => format!("echo sat\n  if grep -q get-model \"$f\"; then printf '%s\\n' '{model}'; fi"),
            Act::Unsat => "echo unsat".into(),
            Act::Unknown => "echo unknown".into(),
            Act::Timeout => "exec sleep 30".into(),
            Act::Reject => "echo '(error \"line 1 column 2: unexpected token\")'; exit 1".into(),
            Act::Crash => {
                "echo 'ASSERTION VIOLATION' >&2; echo 'File: ../src/smt/mock.cpp' >&2; echo 'Line: 42' >&2; exit 134"
                    .into()
            }
        }
    }
}

/// Writes an executable sh script acting as a solver. Model-validation
/// inputs (those containing `define-fun`) get `on_validate`, everything
/// else gets `on_solve`.
pub fn mock_solver(dir: &Path, name: &str, on_solve: Act, on_validate: Act) -> SolverCmd {
    let path = dir.join(format!("{name}.sh"));
    let body = format!(
        "#!/bin/sh\nf=\"$1\"\nif grep -q define-fun \"$f\"; then\n  {}\nelse\n  {}\nfi\n",
        on_validate.sh(),
        on_solve.sh()
    );
    write_executable(&path, &body);
    let mut cmd = SolverCmd::new(name, path);
    cmd.timeout_s = 0.5;
    cmd.version = "mock-1".into();
    cmd
}

pub fn write_executable(path: &Path, body: &str) {
    std::fs::write(path, body).unwrap();
    let mut perm = std::fs::metadata(path).unwrap().permissions();
    perm.set_mode(0o755);
    std::fs::set_permissions(path, perm).unwrap();
}

pub fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// A pseudo-random but fixed script built from builtin-grammar terms
/// combined with connectives, quantifiers and `let`.
pub fn corpus_script(seed: u64) -> Script {
    let gens = builtin_grammars();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut decls: Vec<Command> = Vec::new();
    let mut taken: HashSet<String> = HashSet::new();
    let mut atoms: Vec<String> = Vec::new();
    let n_terms = rng.random_range(1..=5);
    for _ in 0..n_terms {
        let g = &gens.grammars()[rng.random_range(0..gens.len())];
        let t = generate(g, &mut rng).unwrap();
        // Rename apart from earlier terms' variables.
        let mut map = std::collections::HashMap::new();
        for (name, _) in &t.free_vars {
            let new = fresh_name(name, &taken);
            taken.insert(new.clone());
            map.insert(name.clone(), new);
        }
        for d in &t.decls {
            let old = d.declared_symbol().unwrap().to_string();
            decls.push(renamed_decl(d, &map[&old]));
        }
        let term: Term = rename_free(&t.term, &|n| map.get(n).cloned());
        atoms.push(term.to_string());
    }
    let mut asserts = Vec::new();
    let mut i = 0;
    while i < atoms.len() {
        let take = rng.random_range(1..=2).min(atoms.len() - i);
        let group = &atoms[i..i + take];
        i += take;
        let body = match (rng.random_range(0..6), group) {
            (0, [a, b]) => format!("(and {a} (not {b}))"),
            (1, [a, b]) => format!("(=> {a} {b})"),
            (2, [a, b]) => format!("(let ((q!0 {a})) (or q!0 {b}))"),
            (_, [a, b]) => format!("(or {a} {b})"),
            (3, [a]) => format!("(exists ((k!0 Int)) (and (> k!0 0) {a}))"),
            (4, [a]) => format!("(forall ((k!1 Bool)) (or k!1 {a}))"),
            (_, [a]) => a.clone(),
            _ => unreachable!(),
        };
        asserts.push(format!("(assert {body})"));
    }
    let mut text = String::new();
    if rng.random_bool(0.5) {
        text.push_str("(set-logic ALL)\n");
    }
    if rng.random_bool(0.2) {
        text.push_str("(set-option :produce-models true)\n");
    }
    for d in &decls {
        text.push_str(&format!("{d}\n"));
    }
    for a in &asserts {
        text.push_str(a);
        text.push('\n');
    }
    text.push_str("(check-sat)\n");
    if rng.random_bool(0.2) {
        text.push_str("(get-model)\n");
    }
    parse_script(&text).unwrap_or_else(|e| panic!("corpus script {seed} does not parse: {e}\n{text}"))
}

/// `n` corpus scripts.
pub fn corpus(n: usize) -> Vec<Script> {
    (0..n as u64).map(corpus_script).collect()
}
