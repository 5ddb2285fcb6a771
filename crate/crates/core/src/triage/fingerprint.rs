// SPDX-License-Identifier: Apache-2.0

//! Grouping keys for bug reports.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::difftest::{BugKind, Finding, Outcome, SolverVerdict};
use crate::smtlib::{script_theories, Script, Theory};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fingerprint {
    pub kind: BugKind,
    pub key: String,
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.key)
    }
}

static HEX: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"0[xX][0-9a-fA-F]+").unwrap());
// Directory components of absolute or relative paths.
static DIRS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?:[A-Za-z0-9_.~+\-]*/)+([A-Za-z0-9_.+\-]+)").unwrap());
// Long decimal runs not preceded by a line-number marker.
static LONG_NUM: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(:|[Ll]ine:? ?)?\b\d{4,}\b").unwrap());
static MARKER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)assert|fatal|violation|segmentation fault|internal error|check failure|unreachable|panicked|abort")
        .unwrap()
});
static LOCATION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*(File|Line):").unwrap());

fn normalize_once(line: &str) -> String {
    let s = HEX.replace_all(line, "<addr>");
    let s = DIRS.replace_all(&s, "$1");
    let s = LONG_NUM.replace_all(&s, |c: &regex::Captures| match c.get(1) {
        Some(_) => c[0].to_string(),
        None => "<n>".to_string(),
    });
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Strips heap addresses, directory prefixes and long numbers, keeping
/// file basenames and line numbers. Idempotent.
pub fn normalize_line(line: &str) -> String {
    let mut cur = normalize_once(line);
    loop {
        let next = normalize_once(&cur);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

/// Normalizes every line of a log.
pub fn normalize_log(text: &str) -> String {
    text.lines().map(normalize_line).collect::<Vec<_>>().join("\n")
}

/// The first assertion/fatal line of a log, joined with any `File:` and
/// `Line:` lines directly after it.
fn signature(text: &str) -> Option<String> {
    let lines: Vec<&str> = text.lines().collect();
    let i = lines.iter().position(|l| MARKER.is_match(l))?;
    let mut parts = vec![normalize_line(lines[i])];
    parts.extend(
        lines[i + 1..]
            .iter()
            .take_while(|l| LOCATION.is_match(l))
            .map(|l| normalize_line(l)),
    );
    Some(parts.join(" | "))
}

fn hash(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Crash key from the stderr excerpt; falls back to the signal or exit
/// code when no diagnostic line is present. `None` for non-crashes.
pub fn fingerprint_crash(v: &Outcome) -> Option<Fingerprint> {
    let Outcome::Crash { code, signal, excerpt } = v else {
        return None;
    };
    let key = match (signature(excerpt), signal, code) {
        (Some(sig), _, _) => hash(&sig),
        (None, Some(s), _) => format!("signal:{s}"),
        (None, None, Some(c)) => format!("exit:{c}"),
        (None, None, None) => "unknown".to_string(),
    };
    Some(Fingerprint {
        kind: BugKind::Crash,
        key,
    })
}

/// Key for soundness and invalid-model bugs: implicated solver plus the
/// theories the script uses.
pub fn fingerprint_semantic(kind: BugKind, script: &Script, implicated: &str) -> Fingerprint {
    let theories: Vec<String> = script_theories(script).iter().map(Theory::to_string).collect();
    Fingerprint {
        kind,
        key: format!("{implicated}|{}", theories.join(",")),
    }
}

pub fn fingerprint_finding(f: &Finding, script: &Script, verdicts: &BTreeMap<String, SolverVerdict>) -> Fingerprint {
    match f.kind {
        BugKind::Crash => verdicts
            .get(&f.implicated)
            .and_then(|v| fingerprint_crash(&v.outcome))
            .unwrap_or(Fingerprint {
                kind: BugKind::Crash,
                key: "unknown".into(),
            }),
        kind => fingerprint_semantic(kind, script, &f.implicated),
    }
}

/// Whether a candidate's finding counts as the same bug. Crashes must
/// match exactly; semantic bugs must have the same kind and solver and may
/// only lose theories.
pub fn reproduces(
    original: &Fingerprint,
    original_implicated: &str,
    candidate: &Fingerprint,
    implicated: &str,
) -> bool {
    if original.kind != candidate.kind {
        return false;
    }
    if original.kind == BugKind::Crash {
        return original == candidate;
    }
    if original_implicated != implicated {
        return false;
    }
    let theories = |k: &str| -> Vec<String> {
        k.split_once('|')
            .map(|(_, t)| t.split(',').filter(|s| !s.is_empty()).map(String::from).collect())
            .unwrap_or_default()
    };
    let have = theories(&original.key);
    theories(&candidate.key).iter().all(|t| have.contains(t))
}
