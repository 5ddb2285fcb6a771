// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use anyhow::{anyhow, Context, Result};
use serde_json::json;
use skelfuzz::difftest::{load_report, BugReport};
use skelfuzz::smtlib::parse_script;
use skelfuzz::triage::{self as core, load_manifest, reproduces_on, BisectError, BugDatabase};

use crate::args::{BisectArgs, CheckArgs, DedupArgs, ReduceArgs};
use crate::{emit, Ctx, EXIT_CLEAN, EXIT_ERROR};

fn load_bug(dir: &Path) -> Result<BugReport> {
    load_report(dir).with_context(|| format!("loading bug report {}", dir.display()))
}

pub fn dedup(ctx: &Ctx, a: DedupArgs) -> Result<u8> {
    let path = match a.db {
        Some(p) => p,
        None => ctx
            .config
            .fuzz
            .out
            .as_ref()
            .map(|o| o.join("bugs.jsonl"))
            .ok_or_else(|| anyhow!("no bug log; pass --db or set `out` in the configuration"))?,
    };
    let mut db = BugDatabase::open(&path)?;
    for dir in &a.bugs {
        let b = load_bug(dir)?;
        let outcome = db.dedup(&b)?;
        emit(&json!({ "bug": dir, "kind": b.kind, "outcome": outcome }));
    }
    Ok(EXIT_CLEAN)
}

pub fn reduce(ctx: &Ctx, a: ReduceArgs) -> Result<u8> {
    let b = load_bug(&a.bug)?;
    let solvers = ctx.solvers(a.solvers.as_ref())?;
    // The interestingness test calls back into this binary.
    let exe = std::env::current_exe().context("locating the skelfuzz binary")?;
    let bug_dir = std::path::absolute(&a.bug)?;
    let mut check_argv = vec![exe.to_string_lossy().into_owned(), "triage".into(), "check".into()];
    check_argv.extend(ctx.forwarded_args(a.solvers.as_ref())?);
    check_argv.push(bug_dir.to_string_lossy().into_owned());

    let r = core::reduce(&b.script, &a.reducer, &check_argv, &|s| reproduces_on(&b, s, &solvers));
    let out = a.out.unwrap_or_else(|| a.bug.join("reduced.smt2"));
    std::fs::write(&out, format!("{}\n", r.script)).with_context(|| format!("writing {}", out.display()))?;
    emit(&json!({
        "bug": a.bug,
        "out": out,
        "reduced": r.reduced,
        "original_bytes": b.script.to_string().len(),
        "reduced_bytes": r.script.to_string().len(),
        "warnings": r.warnings,
    }));
    Ok(EXIT_CLEAN)
}

pub fn bisect(ctx: &Ctx, a: BisectArgs) -> Result<u8> {
    let b = load_bug(&a.bug)?;
    let solvers = ctx.solvers(a.solvers.as_ref())?;
    let builds = load_manifest(&a.manifest).map_err(anyhow::Error::msg)?;
    let value = match core::bisect(&b, &builds, &solvers) {
        Ok((commit, r)) => json!({
            "status": "fixed",
            "commit": commit,
            "index": r.index,
            "invocations": r.invocations,
        }),
        Err(BisectError::NotFixed) => json!({ "status": "not_fixed" }),
        Err(BisectError::NonMonotone {
            triggered,
            fixed,
            again,
        }) => json!({
            "status": "non_monotone",
            "triggered": builds[triggered].commit,
            "fixed": builds[fixed].commit,
            "triggers_again": builds[again].commit,
        }),
        Err(e) => return Err(e.into()),
    };
    emit(&value);
    Ok(EXIT_CLEAN)
}

/// Exit 0 iff `candidate` still shows the bug. Anything else, including
/// an unparseable candidate, is uninteresting.
pub fn check(ctx: &Ctx, a: CheckArgs) -> Result<u8> {
    let b = load_bug(&a.bug)?;
    let solvers = ctx.solvers(a.solvers.as_ref())?;
    let text = std::fs::read_to_string(&a.candidate).with_context(|| format!("reading {}", a.candidate.display()))?;
    let Ok(candidate) = parse_script(&text) else {
        return Ok(EXIT_ERROR);
    };
    Ok(if reproduces_on(&b, &candidate, &solvers) {
        EXIT_CLEAN
    } else {
        EXIT_ERROR
    })
}
