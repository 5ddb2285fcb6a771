// SPDX-License-Identifier: Apache-2.0

mod common;

use common::{mock_solver, Act};
use skelfuzz::foundry::{
    build_theories, load_docs, score_grammar, FoundryConfig, FoundryError, LmBackend, StubBackend,
};
use skelfuzz::termgen::{builtin_grammars, BUILTIN_SOURCES};

fn builtin(name: &str) -> String {
    BUILTIN_SOURCES.iter().find(|(n, _)| *n == name).unwrap().1.to_string()
}

#[test]
fn docs_load_sorted_by_name() {
    let dir = common::tempdir();
    for (f, text) in [("Strings.md", "strings"), ("Ints.txt", "ints"), ("notes.json", "{}")] {
        std::fs::write(dir.path().join(f), text).unwrap();
    }
    let docs = load_docs(dir.path()).unwrap();
    let names: Vec<_> = docs.iter().map(|d| d.theory_name.as_str()).collect();
    assert_eq!(names, ["Ints", "Strings"]);

    std::fs::write(dir.path().join("Reals.txt"), "  \n").unwrap();
    assert!(matches!(load_docs(dir.path()), Err(FoundryError::EmptyDoc(_))));
    assert!(matches!(
        load_docs(common::tempdir().path()),
        Err(FoundryError::NoDocs(_))
    ));
}

#[test]
fn theories_build_in_parallel_with_their_own_backends() {
    let dir = common::tempdir();
    std::fs::write(dir.path().join("Ints.txt"), "ints").unwrap();
    std::fs::write(dir.path().join("Strings.txt"), "strings").unwrap();
    let docs = load_docs(dir.path()).unwrap();
    let backends: Vec<Box<dyn LmBackend>> = vec![
        Box::new(StubBackend::new(["cfg".into(), builtin("Ints.smtg")])),
        Box::new(StubBackend::new(["cfg".into(), builtin("Strings.smtg")])),
    ];
    let cfg = FoundryConfig::default().without_backoff();
    let results = build_theories(&docs, backends, &cfg);
    for (doc, r) in docs.iter().zip(results) {
        let (g, report) = r.unwrap();
        assert_eq!(g.theory_name, doc.theory_name);
        assert_eq!(report.theory.as_deref(), Some(doc.theory_name.as_str()));
        assert!(report.converged);
        assert_eq!(report.iterations.len(), 1);
    }
}

#[test]
fn solver_rejections_lower_the_score() {
    let dir = common::tempdir();
    let g = builtin_grammars().get("Ints").unwrap().clone();
    let mut cfg = FoundryConfig {
        sample_num: 5,
        ..FoundryConfig::default()
    };
    cfg.solvers = vec![mock_solver(dir.path(), "picky", Act::Reject, Act::Reject)];
    let s = score_grammar(&g, &cfg);
    assert_eq!(s.valid_count, 0);
    assert_eq!(s.errors.len(), 1, "normalized duplicates collapse: {:?}", s.errors);

    cfg.solvers
        .push(mock_solver(dir.path(), "lenient", Act::Unknown, Act::Unknown));
    assert_eq!(score_grammar(&g, &cfg).valid_count, 5);
}
