// SPDX-License-Identifier: Apache-2.0

use std::io::Write;

use anyhow::{Context, Result};
use skelfuzz::termgen::{load_grammar, probe_script, sample_probes};

use crate::args::GenSampleArgs;
use crate::{Ctx, EXIT_CLEAN};

/// Prints `n` probe scripts, blank-line separated. Uses the same sampling
/// stream as grammar scoring, so with equal seeds the probes are the ones
/// the correction loop judged.
pub fn sample(ctx: &Ctx, a: GenSampleArgs) -> Result<u8> {
    let text = std::fs::read_to_string(&a.grammar).with_context(|| format!("reading {}", a.grammar.display()))?;
    let g = load_grammar(&text).with_context(|| format!("loading {}", a.grammar.display()))?;
    let seed = ctx.seed.unwrap_or(ctx.config.foundry.sample_seed);
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (i, probe) in sample_probes(&g, a.n, seed).into_iter().enumerate() {
        let script = probe
            .map_err(|e| e.to_string())
            .and_then(|t| probe_script(&t).map_err(|e| e.to_string()));
        match script {
            Ok(s) => writeln!(out, "{s}\n")?,
            Err(e) => log::warn!("probe {i}: {e}"),
        }
    }
    Ok(EXIT_CLEAN)
}
