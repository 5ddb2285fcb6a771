// SPDX-License-Identifier: Apache-2.0

mod common;

use std::path::Path;

use common::{code, json_lines, mock, skelfuzz, solvers_toml, stdout, CRASH, SAT_X, SCRIPT, UNSAT};
use skelfuzz::difftest::{differential, persist, SolverConfig};
use skelfuzz::smtlib::parse_script;
use skelfuzz::termgen::{load_grammar, probe_script, sample_probes};
use skelfuzz::triage::budget;

fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn script_file(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("input.smt2");
    std::fs::write(&p, SCRIPT).unwrap();
    p
}

/// Persists the single bug `solvers` find on SCRIPT and returns its directory.
fn bug_dir(dir: &Path, solvers_path: &Path) -> std::path::PathBuf {
    let solvers = SolverConfig::load(solvers_path).unwrap();
    let out = differential(&parse_script(SCRIPT).unwrap(), &solvers);
    assert_eq!(out.bugs.len(), 1, "{:?}", out.verdicts);
    persist(&out.bugs[0], &dir.join("bugs"), &solvers).unwrap()
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&skelfuzz(&[])), 1);
    assert_eq!(code(&skelfuzz(&["replay"])), 1);
    assert_eq!(code(&skelfuzz(&["fuzz", "run", "--workers", "many"])), 1);
    assert_eq!(code(&skelfuzz(&["--help"])), 0);
}

#[test]
fn replay_exit_codes() {
    let dir = tempdir();
    let input = script_file(dir.path());
    let a = mock(dir.path(), "a", UNSAT, UNSAT);
    let b = mock(dir.path(), "b", UNSAT, UNSAT);
    let cfg = solvers_toml(dir.path(), &[("a", &a), ("b", &b)]);
    let o = skelfuzz(&["replay", s(&input), "--solvers", s(&cfg)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = &json_lines(&o)[0];
    assert_eq!(v["verdicts"]["a"]["result"], "unsat");
    assert!(v["kind"].is_null());

    // a finds a model that every solver confirms; b says unsat.
    let a = mock(dir.path(), "a", SAT_X, "echo sat");
    let b = mock(dir.path(), "b", UNSAT, "echo sat");
    let cfg = solvers_toml(dir.path(), &[("a", &a), ("b", &b)]);
    let o = skelfuzz(&["replay", s(&input), "--solvers", s(&cfg)]);
    assert_eq!(code(&o), 2);
    let v = &json_lines(&o)[0];
    assert_eq!(v["kind"], "soundness");
    assert_eq!(v["bugs"][0]["implicated"], "b");

    let a = mock(dir.path(), "a", CRASH, UNSAT);
    let cfg = solvers_toml(dir.path(), &[("a", &a), ("b", &b)]);
    let o = skelfuzz(&["replay", s(&input), "--solvers", s(&cfg)]);
    assert_eq!(code(&o), 2);
    assert_eq!(json_lines(&o)[0]["kind"], "crash");

    // No solvers at all is a configuration error.
    assert_eq!(code(&skelfuzz(&["replay", s(&input)])), 1);
}

#[test]
fn gen_sample_matches_library_sampling() {
    let grammar = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/grammars/Strings.smtg");
    let g = load_grammar(&std::fs::read_to_string(&grammar).unwrap()).unwrap();
    let want: String = sample_probes(&g, 20, 5)
        .into_iter()
        .map(|p| format!("{}\n\n", probe_script(&p.unwrap()).unwrap()))
        .collect();
    let o = skelfuzz(&["gen", "sample", s(&grammar), "-n", "20", "--seed", "5"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), want);
    // The default seed is the grammar-scoring seed.
    let o = skelfuzz(&["gen", "sample", s(&grammar), "-n", "3"]);
    let want0: String = sample_probes(&g, 3, 0)
        .into_iter()
        .map(|p| format!("{}\n\n", probe_script(&p.unwrap()).unwrap()))
        .collect();
    assert_eq!(stdout(&o), want0);

    let o = skelfuzz(&["gen", "sample", s(&grammar), "-n", "0"]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());

    let dir = tempdir();
    let bad = dir.path().join("bad.smtg");
    std::fs::write(&bad, "(grammar :theory Ints :start B (rule B ((undefined-nt) 1)))").unwrap();
    assert_eq!(code(&skelfuzz(&["gen", "sample", s(&bad)])), 1);
}

#[test]
fn foundry_build_with_stub() {
    let dir = tempdir();
    let docs = dir.path().join("docs");
    std::fs::create_dir(&docs).unwrap();
    std::fs::write(
        docs.join("Ints.md"),
        "Integer arithmetic: +, -, *, div, mod, abs, <=, <, >=, >.",
    )
    .unwrap();
    let v1 = std::fs::read_to_string(common::core_fixture("foundry/converge_v1.smtg")).unwrap();
    let later: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(common::core_fixture("foundry/converge_stub.json")).unwrap())
            .unwrap();
    let mut responses = vec![serde_json::json!("B ::= I >= I"), serde_json::json!(v1)];
    responses.extend(later["responses"].as_array().unwrap().iter().cloned());
    let stub = dir.path().join("stub.json");
    std::fs::write(&stub, serde_json::json!({ "responses": responses }).to_string()).unwrap();

    let out = dir.path().join("out");
    let o = skelfuzz(&[
        "foundry",
        "build",
        "--docs",
        s(&docs),
        "--out",
        s(&out),
        "--stub",
        s(&stub),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let line = &json_lines(&o)[0];
    assert_eq!(line["theory"], "Ints");
    assert_eq!(line["converged"], true);
    assert_eq!(line["best_valid_count"], 20);
    let built = load_grammar(&std::fs::read_to_string(out.join("Ints.smtg")).unwrap()).unwrap();
    assert_eq!(built.theory_name, "Ints");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let scores: Vec<u64> = report[0]["report"]["iterations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| i["valid_count"].as_u64().unwrap())
        .collect();
    assert_eq!(scores, [12, 20]);

    // An exhausted stub fails the theory and the command.
    std::fs::write(&stub, r#"{"responses": ["only one"]}"#).unwrap();
    let o = skelfuzz(&[
        "foundry",
        "build",
        "--docs",
        s(&docs),
        "--out",
        s(&out),
        "--stub",
        s(&stub),
    ]);
    assert_eq!(code(&o), 1);
    assert!(json_lines(&o)[0]["error"].is_string());
}

#[test]
fn fuzz_run_reports_bugs_and_dedups() {
    let dir = tempdir();
    let seeds = dir.path().join("seeds");
    std::fs::create_dir(&seeds).unwrap();
    script_file(&seeds);
    let a = mock(dir.path(), "a", UNSAT, UNSAT);
    let b = mock(dir.path(), "b", UNSAT, UNSAT);
    let agree = solvers_toml(dir.path(), &[("a", &a), ("b", &b)]);
    let out = dir.path().join("out");
    let run = |solvers: &Path| {
        skelfuzz(&[
            "fuzz",
            "run",
            "--seeds",
            s(&seeds),
            "--solvers",
            s(solvers),
            "--out",
            s(&out),
            "--limit",
            "4",
            "--seed",
            "3",
        ])
    };
    let o = run(&agree);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let lines = json_lines(&o);
    assert_eq!(lines.len(), 1);
    assert!(lines[0]["summary"]["mutants"].as_u64().unwrap() >= 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("mutants/s"));

    let crashing = mock(dir.path(), "a", CRASH, UNSAT);
    let cfg = solvers_toml(dir.path(), &[("a", &crashing), ("b", &b)]);
    let o = run(&cfg);
    assert_eq!(code(&o), 2);
    let lines = json_lines(&o);
    let bugs: Vec<_> = lines.iter().filter(|l| l.get("kind").is_some()).collect();
    assert!(!bugs.is_empty());
    assert!(bugs.iter().all(|b| b["kind"] == "crash" && b["implicated"] == "a"));
    // The crash signature ignores the script, so later sightings are duplicates.
    assert_eq!(bugs[0]["dedup"]["status"], "new");
    assert!(bugs[1..].iter().all(|b| b["dedup"]["status"] == "duplicate"));

    // Recording the same report directory in a fresh log: new, then duplicate.
    let first = bugs[0]["dir"].as_str().unwrap();
    let db = dir.path().join("fresh.jsonl");
    let o = skelfuzz(&["triage", "dedup", first, first, "--db", s(&db)]);
    assert_eq!(code(&o), 0);
    let lines = json_lines(&o);
    assert_eq!(lines[0]["outcome"]["status"], "new");
    assert_eq!(lines[1]["outcome"]["status"], "duplicate");

    // Missing or empty seed directories are configuration errors.
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let o = skelfuzz(&["fuzz", "run", "--seeds", s(&empty), "--limit", "1"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty corpus"));
    assert_eq!(code(&skelfuzz(&["fuzz", "run", "--limit", "1"])), 1);
}

#[test]
fn fuzz_run_from_config_file() {
    let dir = tempdir();
    std::fs::create_dir(dir.path().join("seeds")).unwrap();
    script_file(&dir.path().join("seeds"));
    let a = mock(dir.path(), "a", UNSAT, UNSAT);
    let b = mock(dir.path(), "b", UNSAT, UNSAT);
    solvers_toml(dir.path(), &[("a", &a), ("b", &b)]);
    let cfg = dir.path().join("campaign.toml");
    std::fs::write(
        &cfg,
        "seeds = \"seeds\"\nsolvers = \"solvers.toml\"\nout = \"out\"\n[fuzz]\nkeep_all = true\nmutations_per_seed = 2\n",
    )
    .unwrap();
    let o = skelfuzz(&["--config", s(&cfg), "fuzz", "run", "--limit", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let kept = std::fs::read_dir(dir.path().join("out/mutants")).unwrap().count() as u64;
    assert_eq!(kept, json_lines(&o)[0]["summary"]["mutants"].as_u64().unwrap());

    std::fs::write(&cfg, "seeds = \"nowhere\"\n").unwrap();
    assert_eq!(code(&skelfuzz(&["--config", s(&cfg), "fuzz", "run"])), 1);
}

#[test]
fn triage_reduce_with_scripted_reducer() {
    let dir = tempdir();
    let a = mock(dir.path(), "a", SAT_X, "echo sat");
    let b = mock(dir.path(), "b", UNSAT, "echo sat");
    let cfg = solvers_toml(dir.path(), &[("a", &a), ("b", &b)]);
    let bug = bug_dir(dir.path(), &cfg);

    // Drops the second assert and keeps the change if still interesting.
    let reducer = dir.path().join("reducer.sh");
    common::write_executable(
        &reducer,
        "#!/bin/sh\nt=\"$1\"; f=\"$2\"\ncp \"$f\" \"$f.bak\"\ngrep -v '(< x 5)' \"$f.bak\" > \"$f\"\nif \"$t\" \"$f\"; then exit 0; fi\ncp \"$f.bak\" \"$f\"\n",
    );
    let template = format!("{} {{test}} {{input}}", reducer.display());
    let o = skelfuzz(&[
        "triage",
        "reduce",
        s(&bug),
        "--reducer",
        &template,
        "--solvers",
        s(&cfg),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = &json_lines(&o)[0];
    assert_eq!(v["reduced"], true, "{v}");
    assert!(v["reduced_bytes"].as_u64() < v["original_bytes"].as_u64());
    let reduced = std::fs::read_to_string(bug.join("reduced.smt2")).unwrap();
    assert!(!reduced.contains("(< x 5)"));

    // The test script itself rejects candidates without the bug.
    let clean = dir.path().join("clean.smt2");
    std::fs::write(&clean, "(assert false)\n(check-sat)\n").unwrap();
    let o = skelfuzz(&["triage", "check", s(&bug), s(&clean), "--solvers", s(&cfg)]);
    assert_eq!(code(&o), 1);

    // Missing reducer: original kept, warning reported.
    let o = skelfuzz(&[
        "triage",
        "reduce",
        s(&bug),
        "--reducer",
        "/nonexistent/ddsmt {test} {input}",
        "--solvers",
        s(&cfg),
    ]);
    assert_eq!(code(&o), 0);
    let v = &json_lines(&o)[0];
    assert_eq!(v["reduced"], false);
    assert!(!v["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn triage_bisect_over_build_manifest() {
    let dir = tempdir();
    let a = mock(dir.path(), "a", SAT_X, "echo sat");
    let b = mock(dir.path(), "b", UNSAT, "echo sat");
    let cfg = solvers_toml(dir.path(), &[("a", &a), ("b", &b)]);
    let bug = bug_dir(dir.path(), &cfg);

    // Builds c0..c2 of b still say unsat; c3 onward agree with a.
    let mut manifest = String::new();
    for i in 0..8 {
        let solve = if i < 3 { UNSAT } else { SAT_X };
        let build = mock(dir.path(), &format!("b-c{i}"), solve, "echo sat");
        manifest.push_str(&format!(
            "[[build]]\ncommit = \"c{i}\"\npath = \"{}\"\n",
            build.display()
        ));
    }
    let m = dir.path().join("builds.toml");
    std::fs::write(&m, manifest).unwrap();
    let o = skelfuzz(&["triage", "bisect", s(&bug), "--manifest", s(&m), "--solvers", s(&cfg)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = &json_lines(&o)[0];
    assert_eq!(v["status"], "fixed");
    assert_eq!(v["commit"], "c3");
    assert!(v["invocations"].as_u64().unwrap() as usize <= budget(8));

    // Every build still buggy.
    let mut manifest = String::new();
    for i in 0..4 {
        manifest.push_str(&format!("[[build]]\ncommit = \"c{i}\"\npath = \"{}\"\n", b.display()));
    }
    std::fs::write(&m, manifest).unwrap();
    let o = skelfuzz(&["triage", "bisect", s(&bug), "--manifest", s(&m), "--solvers", s(&cfg)]);
    assert_eq!(json_lines(&o)[0]["status"], "not_fixed");
}
