// SPDX-License-Identifier: Apache-2.0

//! Bug reports and their on-disk layout.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::classify::{BugKind, Finding};
use super::solver::{SolverCmd, SolverVerdict};
use crate::smtlib::{parse_script, ParseError, Script};
use crate::triage::{fingerprint_finding, Fingerprint};

/// Where a mutant came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub worker: usize,
    pub seed_file: String,
    /// Index of the mutation within the seed's chain.
    pub iteration: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BugReport {
    pub kind: BugKind,
    pub script: Script,
    pub verdicts: BTreeMap<String, SolverVerdict>,
    pub fingerprint: Fingerprint,
    pub implicated: String,
    pub provenance: Option<Provenance>,
}

impl BugReport {
    pub fn from_finding(script: &Script, verdicts: &[(String, SolverVerdict)], f: &Finding) -> Self {
        let verdicts: BTreeMap<String, SolverVerdict> = verdicts.iter().cloned().collect();
        let fingerprint = fingerprint_finding(f, script, &verdicts);
        BugReport {
            kind: f.kind,
            script: script.clone(),
            verdicts,
            fingerprint,
            implicated: f.implicated.clone(),
            provenance: None,
        }
    }

    /// Directory name: kind, fingerprint prefix and script hash.
    pub fn dir_name(&self) -> String {
        let digest = Sha256::digest(self.script.to_string().as_bytes());
        let script_hash: String = digest.iter().take(4).map(|b| format!("{b:02x}")).collect();
        let key: String = self
            .fingerprint
            .key
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .take(24)
            .collect();
        format!("{}-{}-{}", self.kind, key, script_hash)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportMeta {
    pub kind: BugKind,
    pub fingerprint: Fingerprint,
    pub implicated: String,
    #[serde(default)]
    pub solver_versions: BTreeMap<String, String>,
    #[serde(default)]
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `bug.smt2`, `verdicts.json` and `meta.json` under
/// `out/<dir_name>` and returns that directory.
pub fn persist(report: &BugReport, out: &Path, solvers: &[SolverCmd]) -> Result<PathBuf, ReportError> {
    let dir = out.join(report.dir_name());
    std::fs::create_dir_all(&dir).map_err(io(&dir))?;
    let bug = dir.join("bug.smt2");
    std::fs::write(&bug, format!("{}\n", report.script)).map_err(io(&bug))?;
    let meta = ReportMeta {
        kind: report.kind,
        fingerprint: report.fingerprint.clone(),
        implicated: report.implicated.clone(),
        solver_versions: solvers.iter().map(|s| (s.name.clone(), s.version.clone())).collect(),
        provenance: report.provenance.clone(),
    };
    for (name, value) in [
        ("verdicts.json", serde_json::to_string_pretty(&report.verdicts)),
        ("meta.json", serde_json::to_string_pretty(&meta)),
    ] {
        let path = dir.join(name);
        let text = value.map_err(|source| ReportError::Json {
            path: path.clone(),
            source,
        })?;
        std::fs::write(&path, text + "\n").map_err(io(&path))?;
    }
    Ok(dir)
}

/// Reads a report directory written by [`persist`].
pub fn load_report(dir: &Path) -> Result<BugReport, ReportError> {
    let read = |name: &str| -> Result<String, ReportError> {
        let path = dir.join(name);
        std::fs::read_to_string(&path).map_err(io(&path))
    };
    let script_text = read("bug.smt2")?;
    let script = parse_script(&script_text).map_err(|source| ReportError::Parse {
        path: dir.join("bug.smt2"),
        source,
    })?;
    let verdicts_text = read("verdicts.json")?;
    let verdicts = serde_json::from_str(&verdicts_text).map_err(|source| ReportError::Json {
        path: dir.join("verdicts.json"),
        source,
    })?;
    let meta_text = read("meta.json")?;
    let meta: ReportMeta = serde_json::from_str(&meta_text).map_err(|source| ReportError::Json {
        path: dir.join("meta.json"),
        source,
    })?;
    Ok(BugReport {
        kind: meta.kind,
        script,
        verdicts,
        fingerprint: meta.fingerprint,
        implicated: meta.implicated,
        provenance: meta.provenance,
    })
}
