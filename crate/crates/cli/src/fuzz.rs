// SPDX-License-Identifier: Apache-2.0

use std::time::{Duration, Instant};

use anyhow::{anyhow, Context, Result};
use serde_json::json;
use skelfuzz::fuzzloop::{ingest_seeds, prefilter, stats_line, with_progress, FuzzEvent, Fuzzer};
use skelfuzz::termgen::{builtin_grammars, load_grammar_dir};

use crate::args::FuzzRunArgs;
use crate::replay::bug_json;
use crate::{emit, Ctx, EXIT_BUG, EXIT_CLEAN};

pub fn run(ctx: &Ctx, a: FuzzRunArgs) -> Result<u8> {
    let mut cfg = ctx.config.fuzz.clone();
    if let Some(s) = ctx.seed {
        cfg.master_seed = s;
    }
    cfg.workers = a.workers.unwrap_or(cfg.workers);
    cfg.mutations_per_seed = a.iterations.unwrap_or(cfg.mutations_per_seed);
    cfg.timeout_s = a.timeout.unwrap_or(cfg.timeout_s);
    cfg.p_remove = a.p_remove.unwrap_or(cfg.p_remove);
    cfg.p_adapt = a.p_adapt.unwrap_or(cfg.p_adapt);
    cfg.independent |= a.independent;
    cfg.keep_all |= a.keep_all;
    if a.out.is_some() {
        cfg.out = a.out.clone();
    }
    cfg.validate()?;

    let seeds = a
        .seeds
        .as_ref()
        .or(ctx.config.seeds.as_ref())
        .ok_or_else(|| anyhow!("no seed directory; pass --seeds or set `seeds` in the configuration"))?;
    let gens = match a.grammars.as_ref().or(ctx.config.grammars.as_ref()) {
        Some(dir) => load_grammar_dir(dir).with_context(|| format!("loading grammars from {}", dir.display()))?,
        None => builtin_grammars(),
    };
    let solvers = ctx.solvers(a.solvers.as_ref())?;
    if solvers.is_empty() {
        log::warn!("no solvers configured; mutants are generated but not run");
    }

    let (mut corpus, skipped) = ingest_seeds(seeds)?;
    if a.prefilter {
        let (kept, dropped) = prefilter(corpus, &solvers);
        log::info!("prefilter dropped {} seeds", dropped.len());
        corpus = kept;
        if corpus.is_empty() {
            return Err(anyhow!("empty corpus after prefiltering"));
        }
    }
    log::info!(
        "{} seeds ({} skipped), {} grammars, {} solvers",
        corpus.len(),
        skipped.len(),
        gens.len(),
        solvers.len()
    );

    let fuzzer = Fuzzer::new(&gens, &corpus, &solvers, cfg)?;
    let on_event = |e: &FuzzEvent| {
        if let FuzzEvent::Bug { report, dedup, dir } = e {
            let mut v = bug_json(report);
            v["dedup"] = json!(dedup);
            v["dir"] = json!(dir);
            emit(&v);
        }
    };
    let start = Instant::now();
    let bugs = with_progress(
        &fuzzer,
        Duration::from_secs(a.stats_every.max(1)),
        |stats, elapsed| eprintln!("{}", stats_line(stats, elapsed)),
        || fuzzer.run(a.limit, &on_event),
    )?;
    let stats = fuzzer.stats();
    eprintln!("{}", stats_line(&stats, start.elapsed()));
    emit(&json!({ "summary": stats }));
    Ok(if bugs.is_empty() { EXIT_CLEAN } else { EXIT_BUG })
}
