// SPDX-License-Identifier: Apache-2.0

use anyhow::{bail, Context, Result};
use serde_json::json;
use skelfuzz::foundry::{
    build_theories, build_theory, load_docs, CorrectionReport, FoundryError, HttpBackend, LmBackend, StubBackend,
};
use skelfuzz::termgen::TheoryGrammar;

use crate::args::FoundryBuildArgs;
use crate::{emit, Ctx, EXIT_CLEAN, EXIT_ERROR};

type Built = Result<(TheoryGrammar, CorrectionReport), FoundryError>;

pub fn build(ctx: &Ctx, a: FoundryBuildArgs) -> Result<u8> {
    let docs = load_docs(&a.docs)?;
    let mut cfg = ctx.config.foundry.clone();
    cfg.sample_num = a.sample_num.unwrap_or(cfg.sample_num);
    cfg.max_iter = a.max_iter.unwrap_or(cfg.max_iter);
    cfg.sample_seed = ctx.seed.unwrap_or(cfg.sample_seed);
    if a.solvers.is_some() {
        cfg.solvers = ctx.solvers(a.solvers.as_ref())?;
    }
    cfg.validate()?;

    let results: Vec<Built> = match (&a.stub, &ctx.config.lm) {
        // One shared queue: theories run one after another in name order
        // so the responses are consumed deterministically.
        (Some(stub), _) if stub.is_file() => {
            let lm = StubBackend::load(stub).map_err(anyhow::Error::msg)?;
            let cfg = cfg.without_backoff();
            docs.iter().map(|d| build_theory(d, &lm, &cfg)).collect()
        }
        (Some(dir), _) => {
            let mut backends: Vec<Box<dyn LmBackend>> = Vec::new();
            for d in &docs {
                let path = dir.join(format!("{}.json", d.theory_name));
                backends.push(Box::new(StubBackend::load(&path).map_err(anyhow::Error::msg)?));
            }
            build_theories(&docs, backends, &cfg.without_backoff())
        }
        (None, Some(lm)) => {
            let backends: Vec<Box<dyn LmBackend>> = docs
                .iter()
                .map(|_| Box::new(HttpBackend::new(&lm.endpoint, &lm.model, &lm.token_env)) as Box<dyn LmBackend>)
                .collect();
            build_theories(&docs, backends, &cfg)
        }
        (None, None) => bail!("no model backend; pass --stub or set foundry.endpoint and foundry.model"),
    };

    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut entries = Vec::new();
    let mut failed = 0;
    for (doc, r) in docs.iter().zip(results) {
        match r {
            Ok((g, report)) => {
                let path = a.out.join(format!("{}.smtg", doc.theory_name));
                std::fs::write(&path, format!("{g}\n")).with_context(|| format!("writing {}", path.display()))?;
                entries.push(json!({
                    "theory": doc.theory_name,
                    "grammar": path,
                    "report": report,
                }));
            }
            Err(e) => {
                failed += 1;
                log::error!("{}: {e}", doc.theory_name);
                entries.push(json!({
                    "theory": doc.theory_name,
                    "error": e.to_string(),
                    "report": e.report(),
                }));
            }
        }
    }
    let report_path = a.out.join("report.json");
    std::fs::write(&report_path, serde_json::to_string_pretty(&entries)? + "\n")
        .with_context(|| format!("writing {}", report_path.display()))?;
    for e in &entries {
        let best = &e["report"]["best_valid_count"];
        emit(&json!({
            "theory": e["theory"],
            "grammar": e["grammar"],
            "best_valid_count": best,
            "converged": e["report"]["converged"],
            "error": e["error"],
        }));
    }
    Ok(if failed == 0 { EXIT_CLEAN } else { EXIT_ERROR })
}
