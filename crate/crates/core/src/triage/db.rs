// SPDX-License-Identifier: Apache-2.0

//! Append-only bug database backed by a JSON-lines file.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::fingerprint::Fingerprint;
use crate::difftest::{BugKind, BugReport, Provenance, SolverVerdict};

/// The stored form of a canonical report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredReport {
    pub kind: BugKind,
    pub implicated: String,
    pub script: String,
    pub verdicts: BTreeMap<String, SolverVerdict>,
    #[serde(default)]
    pub provenance: Option<Provenance>,
}

impl From<&BugReport> for StoredReport {
    fn from(b: &BugReport) -> Self {
        StoredReport {
            kind: b.kind,
            implicated: b.implicated.clone(),
            script: b.script.to_string(),
            verdicts: b.verdicts.clone(),
            provenance: b.provenance.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
enum Event {
    New {
        seq: u64,
        fingerprint: Fingerprint,
        report: StoredReport,
    },
    Duplicate {
        seq: u64,
        fingerprint: Fingerprint,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    /// Insertion sequence number of the first sighting.
    pub first_seen: u64,
    pub report: StoredReport,
    pub duplicates: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DedupOutcome {
    New { fingerprint: Fingerprint },
    Duplicate { of: Fingerprint },
}

#[derive(Debug, Error)]
pub enum DbError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {source}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        source: serde_json::Error,
    },
}

/// Fingerprint → first report and duplicate count. With a path, every
/// event is appended to that file before it takes effect in memory.
#[derive(Debug, Default)]
pub struct BugDatabase {
    entries: BTreeMap<Fingerprint, Entry>,
    next_seq: u64,
    path: Option<PathBuf>,
}

impl BugDatabase {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or starts) the log at `path`, replaying existing events.
    pub fn open(path: &Path) -> Result<Self, DbError> {
        let mut db = BugDatabase {
            path: Some(path.to_path_buf()),
            ..Default::default()
        };
        let io = |source| DbError::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = match std::fs::File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(db),
            Err(e) => return Err(io(e)),
        };
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io)?;
            if line.trim().is_empty() {
                continue;
            }
            let event: Event = serde_json::from_str(&line).map_err(|source| DbError::Corrupt {
                path: path.to_path_buf(),
                line: i + 1,
                source,
            })?;
            db.apply(event);
        }
        Ok(db)
    }

    fn apply(&mut self, e: Event) {
        match e {
            Event::New {
                seq,
                fingerprint,
                report,
            } => {
                self.next_seq = self.next_seq.max(seq + 1);
                self.entries.entry(fingerprint).or_insert(Entry {
                    first_seen: seq,
                    report,
                    duplicates: 0,
                });
            }
            Event::Duplicate { seq, fingerprint } => {
                self.next_seq = self.next_seq.max(seq + 1);
                if let Some(entry) = self.entries.get_mut(&fingerprint) {
                    entry.duplicates += 1;
                }
            }
        }
    }

    fn append(&mut self, e: Event) -> Result<(), DbError> {
        if let Some(path) = &self.path {
            let io = |source| DbError::Io {
                path: path.clone(),
                source,
            };
            let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
            let line = serde_json::to_string(&e).expect("events serialize");
            writeln!(f, "{line}").map_err(io)?;
        }
        self.apply(e);
        Ok(())
    }

    /// Records `b`, returning whether its fingerprint was already known.
    pub fn dedup(&mut self, b: &BugReport) -> Result<DedupOutcome, DbError> {
        let seq = self.next_seq;
        let fingerprint = b.fingerprint.clone();
        if self.entries.contains_key(&fingerprint) {
            self.append(Event::Duplicate {
                seq,
                fingerprint: fingerprint.clone(),
            })?;
            return Ok(DedupOutcome::Duplicate { of: fingerprint });
        }
        self.append(Event::New {
            seq,
            fingerprint: fingerprint.clone(),
            report: b.into(),
        })?;
        Ok(DedupOutcome::New { fingerprint })
    }

    pub fn get(&self, fp: &Fingerprint) -> Option<&Entry> {
        self.entries.get(fp)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Fingerprint, &Entry)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
