// SPDX-License-Identifier: Apache-2.0

mod common;

use std::sync::Mutex;

use common::{mock_solver, Act, INT_OR_SEED};
use skelfuzz::difftest::{load_report, BugKind};
use skelfuzz::fuzzloop::{fuzz, ingest_seeds, prefilter, CorpusError, FuzzConfig, FuzzEvent, Fuzzer, SeedCorpus};
use skelfuzz::smtlib::{check_script, parse_script};
use skelfuzz::termgen::{builtin_grammars, load_grammar_dir};
use skelfuzz::triage::BugDatabase;

const MODEL: &str = "(model (define-fun T () Int 0))";

fn int_or_corpus() -> SeedCorpus {
    SeedCorpus::from_scripts([parse_script(INT_OR_SEED).unwrap()])
}

#[test]
fn agreeing_solvers_find_nothing() {
    let dir = common::tempdir();
    let solvers = vec![
        mock_solver(dir.path(), "a", Act::Unsat, Act::Unsat),
        mock_solver(dir.path(), "b", Act::Unsat, Act::Unsat),
    ];
    let cfg = FuzzConfig {
        workers: 2,
        ..Default::default()
    };
    let (bugs, stats) = fuzz(&builtin_grammars(), &int_or_corpus(), &solvers, cfg, Some(12)).unwrap();
    assert!(bugs.is_empty());
    assert!(stats.mutants >= 10, "{stats:?}");
    assert_eq!(stats.verdicts.get("unsat"), Some(&(2 * stats.mutants)));
}

#[test]
fn each_discrepant_mutant_files_one_soundness_bug() {
    let dir = common::tempdir();
    let out = dir.path().join("out");
    let solvers = vec![
        mock_solver(dir.path(), "a", Act::Sat(MODEL), Act::Sat(MODEL)),
        mock_solver(dir.path(), "b", Act::Unsat, Act::Sat(MODEL)),
    ];
    let cfg = FuzzConfig {
        out: Some(out.clone()),
        master_seed: 9,
        ..Default::default()
    };
    let gens = builtin_grammars();
    let corpus = int_or_corpus();
    let f = Fuzzer::new(&gens, &corpus, &solvers, cfg).unwrap();
    let mutants = Mutex::new(Vec::new());
    let bugs = f
        .run(Some(6), &|e| {
            if let FuzzEvent::Mutant(m) = e {
                mutants.lock().unwrap().push(m.output.clone());
            }
        })
        .unwrap();
    let ok: Vec<_> = mutants
        .into_inner()
        .unwrap()
        .into_iter()
        .filter_map(Result::ok)
        .collect();
    assert_eq!(bugs.len(), ok.len());
    for (b, m) in bugs.iter().zip(&ok) {
        assert_eq!(b.kind, BugKind::Soundness);
        assert_eq!(b.implicated, "b");
        assert_eq!(&b.script, m);
        let p = b.provenance.as_ref().unwrap();
        assert_eq!((p.master_seed, p.worker), (9, 0));
    }
    // Every report is on disk and the log knows every fingerprint.
    let dirs: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .collect();
    assert_eq!(dirs.len(), bugs.len());
    for d in &dirs {
        let r = load_report(&d.path()).unwrap();
        check_script(&r.script).unwrap();
    }
    let db = BugDatabase::open(&out.join("bugs.jsonl")).unwrap();
    for b in &bugs {
        assert!(db.get(&b.fingerprint).is_some());
    }
    assert_eq!(f.stats().bugs, bugs.len() as u64);
}

#[test]
fn launch_failure_is_a_crash_verdict() {
    let dir = common::tempdir();
    let mut missing = mock_solver(dir.path(), "a", Act::Unsat, Act::Unsat);
    missing.cmd = dir.path().join("does-not-exist");
    let solvers = vec![missing, mock_solver(dir.path(), "b", Act::Unsat, Act::Unsat)];
    let (bugs, stats) = fuzz(
        &builtin_grammars(),
        &int_or_corpus(),
        &solvers,
        FuzzConfig::default(),
        Some(2),
    )
    .unwrap();
    assert_eq!(stats.verdicts.get("crash"), Some(&2));
    assert!(bugs.iter().all(|b| b.kind == BugKind::Crash && b.implicated == "a"));
}

#[test]
fn keep_all_writes_mutants() {
    let dir = common::tempdir();
    let cfg = FuzzConfig {
        out: Some(dir.path().to_path_buf()),
        keep_all: true,
        ..Default::default()
    };
    let (_, stats) = fuzz(&builtin_grammars(), &int_or_corpus(), &[], cfg, Some(5)).unwrap();
    let kept = std::fs::read_dir(dir.path().join("mutants")).unwrap().count() as u64;
    assert_eq!(kept, stats.mutants);
}

#[test]
fn ingestion() {
    let dir = common::tempdir();
    std::fs::write(dir.path().join("int_or.smt2"), INT_OR_SEED).unwrap();
    let (c, skipped) = ingest_seeds(dir.path()).unwrap();
    assert_eq!(c.len(), 1);
    assert!(skipped.is_empty());

    std::fs::create_dir(dir.path().join("nested")).unwrap();
    std::fs::write(dir.path().join("nested/bad.smt2"), "(assert (and true").unwrap();
    std::fs::write(
        dir.path().join("nested/ill.smt2"),
        "(declare-fun x () Int)(assert (+ x 1))",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("nested/ok.smt2"),
        "(declare-fun y () Int)(assert (> y 0))",
    )
    .unwrap();
    std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let (c, skipped) = ingest_seeds(dir.path()).unwrap();
    assert_eq!(c.len(), 2);
    assert_eq!(skipped.len(), 2);

    let empty = common::tempdir();
    let err = ingest_seeds(empty.path()).unwrap_err();
    assert!(matches!(err, CorpusError::Empty(_)));
    assert!(err.to_string().contains("empty corpus"));
}

#[test]
fn prefilter_drops_seeds_that_already_disagree() {
    let dir = common::tempdir();
    // Answers unsat only for scripts mentioning T.
    let picky = dir.path().join("picky.sh");
    common::write_executable(
        &picky,
        "#!/bin/sh\nif grep -q define-fun \"$1\"; then echo sat; elif grep -q ' T ' \"$1\"; then echo unsat; else echo sat; printf '%s\\n' '(model)'; fi\n",
    );
    let mut b = skelfuzz::difftest::SolverCmd::new("b", &picky);
    b.timeout_s = 2.0;
    let solvers = vec![
        mock_solver(
            dir.path(),
            "a",
            Act::Sat("(model (define-fun T () Int 0))"),
            Act::Sat("(model)"),
        ),
        b,
    ];
    let corpus = SeedCorpus::from_scripts([
        parse_script(INT_OR_SEED).unwrap(),
        parse_script("(declare-fun y () Int)(assert (> y 0))").unwrap(),
    ]);
    let (kept, dropped) = prefilter(corpus, &solvers);
    assert_eq!(kept.len(), 1);
    assert_eq!(dropped.len(), 1);
    assert_eq!(dropped[0].path.to_str(), Some("mem:0"));
}

#[test]
fn grammar_directory_loads_in_name_order() {
    let d = common::fixture_dir().join("grammars");
    let set = load_grammar_dir(&d).unwrap();
    assert_eq!(set.names().collect::<Vec<_>>(), ["Ints", "Strings"]);
    assert!(load_grammar_dir(common::tempdir().path()).is_err());
}
