// SPDX-License-Identifier: Apache-2.0

//! Binary search for the first build on which a bug no longer triggers.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BisectError {
    #[error("no builds to search")]
    Empty,
    #[error("bug does not trigger on the oldest build")]
    NotTriggeringOnOldest,
    #[error("bug still triggers on the newest build")]
    NotFixed,
    #[error("trigger pattern is not monotone: triggers at {triggered}, fixed at {fixed}, triggers again at {again}")]
    NonMonotone {
        triggered: usize,
        fixed: usize,
        again: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BisectResult {
    /// Index of the first build where the bug no longer triggers.
    pub index: usize,
    pub invocations: usize,
}

/// Invocation budget for `n` builds: ⌈log2 n⌉ + 2.
pub fn budget(n: usize) -> usize {
    (usize::BITS - n.saturating_sub(1).leading_zeros()) as usize + 2
}

/// Finds the first index where `triggers` is false, given it is true at 0.
/// Leftover budget is spent probing the fixed region to catch regressions.
pub fn bisect_by(n: usize, mut triggers: impl FnMut(usize) -> bool) -> Result<BisectResult, BisectError> {
    if n == 0 {
        return Err(BisectError::Empty);
    }
    let mut calls = 0;
    let mut probe = |i: usize, calls: &mut usize| {
        *calls += 1;
        triggers(i)
    };
    if !probe(0, &mut calls) {
        return Err(BisectError::NotTriggeringOnOldest);
    }
    if n == 1 || probe(n - 1, &mut calls) {
        return Err(BisectError::NotFixed);
    }
    let (mut lo, mut hi) = (0, n - 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if probe(mid, &mut calls) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Spot checks between the first fixed build and the newest.
    let (mut a, b) = (hi, n - 1);
    while calls < budget(n) && b - a > 1 {
        let mid = a + (b - a) / 2;
        if probe(mid, &mut calls) {
            return Err(BisectError::NonMonotone {
                triggered: lo,
                fixed: hi,
                again: mid,
            });
        }
        a = mid;
    }
    Ok(BisectResult {
        index: hi,
        invocations: calls,
    })
}

/// One entry of a bisection manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Build {
    pub commit: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    build: Vec<Build>,
}

/// Reads `[[build]] commit = "...", path = "..."` entries, oldest first.
/// Relative paths are resolved against the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Vec<Build>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let m: Manifest = toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(m.build
        .into_iter()
        .map(|b| Build {
            path: if b.path.is_absolute() {
                b.path
            } else {
                base.join(b.path)
            },
            commit: b.commit,
        })
        .collect())
}
