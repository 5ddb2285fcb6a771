// SPDX-License-Identifier: Apache-2.0

use anyhow::{bail, Context, Result};
use serde_json::json;
use skelfuzz::difftest::{differential, BugReport, SolverVerdict};
use skelfuzz::smtlib::parse_script;

use crate::args::ReplayArgs;
use crate::{emit, Ctx, EXIT_BUG, EXIT_CLEAN};

pub fn bug_json(b: &BugReport) -> serde_json::Value {
    json!({
        "kind": b.kind,
        "implicated": b.implicated,
        "fingerprint": b.fingerprint,
    })
}

pub fn run(ctx: &Ctx, a: ReplayArgs) -> Result<u8> {
    let solvers = ctx.solvers(a.solvers.as_ref())?;
    if solvers.is_empty() {
        bail!("no solvers configured; pass --solvers or --config");
    }
    let text = std::fs::read_to_string(&a.file).with_context(|| format!("reading {}", a.file.display()))?;
    let script = parse_script(&text).with_context(|| format!("parsing {}", a.file.display()))?;
    let out = differential(&script, &solvers);
    let verdicts: serde_json::Map<String, serde_json::Value> = out
        .verdicts
        .iter()
        .map(|(name, v): &(String, SolverVerdict)| Ok((name.clone(), serde_json::to_value(v)?)))
        .collect::<Result<_, serde_json::Error>>()?;
    emit(&json!({
        "file": a.file,
        "verdicts": verdicts,
        "kind": out.bugs.first().map(|b| b.kind),
        "bugs": out.bugs.iter().map(bug_json).collect::<Vec<_>>(),
    }));
    Ok(if out.bugs.is_empty() { EXIT_CLEAN } else { EXIT_BUG })
}
