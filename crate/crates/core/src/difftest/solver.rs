// SPDX-License-Identifier: Apache-2.0

//! Solver configuration and subprocess execution.

use std::io::Read;
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use wait_timeout::ChildExt;

use crate::smtlib::{Command as SmtCommand, Script};

pub const DEFAULT_TIMEOUT_S: f64 = 10.0;

/// Stderr/stdout substrings that mark a crash regardless of exit status.
pub fn default_crash_patterns() -> Vec<String> {
    [
        "ASSERTION VIOLATION",
        "Segmentation fault",
        "Fatal failure",
        "INTERNAL ERROR",
    ]
    .map(String::from)
    .to_vec()
}

fn default_args() -> Vec<String> {
    vec!["{file}".into()]
}

fn default_timeout() -> f64 {
    DEFAULT_TIMEOUT_S
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverCmd {
    pub name: String,
    pub cmd: PathBuf,
    /// `{file}` is replaced by the input path.
    #[serde(default = "default_args")]
    pub args: Vec<String>,
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
    #[serde(default)]
    pub mem_mb: Option<u64>,
    #[serde(default)]
    pub version: String,
    /// Solvers sharing a family are versions of one solver.
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default = "default_crash_patterns")]
    pub crash_patterns: Vec<String>,
}

impl SolverCmd {
    pub fn new(name: impl Into<String>, cmd: impl Into<PathBuf>) -> Self {
        SolverCmd {
            name: name.into(),
            cmd: cmd.into(),
            args: default_args(),
            timeout_s: DEFAULT_TIMEOUT_S,
            mem_mb: None,
            version: String::new(),
            family: None,
            crash_patterns: default_crash_patterns(),
        }
    }

    pub fn family(&self) -> &str {
        self.family.as_deref().unwrap_or(&self.name)
    }
}

#[derive(Debug, Error)]
pub enum SolverConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error("solver `{name}`: executable `{cmd}` not found")]
    MissingExecutable { name: String, cmd: PathBuf },
    #[error("solver `{0}`: timeout must be positive")]
    BadTimeout(String),
    #[error("duplicate solver name `{0}`")]
    Duplicate(String),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SolverConfig {
    #[serde(default)]
    pub solver: Vec<SolverCmd>,
    /// Replaces every solver's crash patterns when set.
    #[serde(default)]
    pub crash_patterns: Option<Vec<String>>,
}

impl SolverConfig {
    /// Parses TOML and resolves executables against `base` and `PATH`.
    pub fn from_toml(text: &str, base: &Path, origin: &Path) -> Result<Vec<SolverCmd>, SolverConfigError> {
        let cfg: SolverConfig = toml::from_str(text).map_err(|source| SolverConfigError::Toml {
            path: origin.to_path_buf(),
            source,
        })?;
        let mut out: Vec<SolverCmd> = Vec::with_capacity(cfg.solver.len());
        for mut s in cfg.solver {
            if out.iter().any(|o| o.name == s.name) {
                return Err(SolverConfigError::Duplicate(s.name));
            }
            if s.timeout_s.is_nan() || s.timeout_s <= 0.0 {
                return Err(SolverConfigError::BadTimeout(s.name));
            }
            s.cmd = resolve_executable(&s.cmd, base).ok_or_else(|| SolverConfigError::MissingExecutable {
                name: s.name.clone(),
                cmd: s.cmd.clone(),
            })?;
            if let Some(p) = &cfg.crash_patterns {
                s.crash_patterns = p.clone();
            }
            out.push(s);
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Vec<SolverCmd>, SolverConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| SolverConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base, path)
    }
}

fn resolve_executable(cmd: &Path, base: &Path) -> Option<PathBuf> {
    if cmd.components().count() > 1 {
        let p = if cmd.is_absolute() {
            cmd.to_path_buf()
        } else {
            base.join(cmd)
        };
        return p.is_file().then_some(p);
    }
    which::which(cmd).ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Outcome {
    Sat {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        model: Option<String>,
    },
    Unsat,
    Unknown,
    Timeout,
    ParseRejected {
        message: String,
    },
    Crash {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        code: Option<i32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        signal: Option<i32>,
        excerpt: String,
    },
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Sat { .. } => "sat",
            Outcome::Unsat => "unsat",
            Outcome::Unknown => "unknown",
            Outcome::Timeout => "timeout",
            Outcome::ParseRejected { .. } => "parse_rejected",
            Outcome::Crash { .. } => "crash",
        }
    }

    pub fn is_sat(&self) -> bool {
        matches!(self, Outcome::Sat { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverVerdict {
    #[serde(flatten)]
    pub outcome: Outcome,
    pub wall_ms: u64,
}

const EXCERPT_BYTES: usize = 4096;

fn excerpt(text: &str) -> String {
    if text.len() <= EXCERPT_BYTES {
        return text.to_string();
    }
    let mut start = text.len() - EXCERPT_BYTES;
    while !text.is_char_boundary(start) {
        start += 1;
    }
    text[start..].to_string()
}

/// Input text for one run. With `want_model`, models are enabled and a
/// `(get-model)` follows the last `check-sat`.
pub fn solver_input(s: &Script, want_model: bool) -> String {
    let has_check = s.commands().iter().any(|c| matches!(c, SmtCommand::CheckSat));
    let already = s.commands().iter().any(|c| matches!(c, SmtCommand::GetModel));
    if !(want_model && has_check && !already) {
        return format!("{s}\n");
    }
    let last = s
        .commands()
        .iter()
        .rposition(|c| matches!(c, SmtCommand::CheckSat))
        .expect("has check-sat");
    let mut out = String::from("(set-option :produce-models true)\n");
    for (i, c) in s.commands().iter().enumerate() {
        out.push_str(&c.to_string());
        out.push('\n');
        if i == last {
            out.push_str("(get-model)\n");
        }
    }
    out
}

fn is_error_line(line: &str) -> bool {
    let l = line.trim_start();
    l.starts_with("(error") || l.to_ascii_lowercase().starts_with("error")
}

/// Maps raw process results to an outcome. `status` is `None` on timeout.
pub fn interpret(
    cmd: &SolverCmd,
    exit: Option<std::process::ExitStatus>,
    stdout: &str,
    stderr: &str,
    want_model: bool,
) -> Outcome {
    let Some(exit) = exit else {
        return Outcome::Timeout;
    };
    let crash = |code: Option<i32>, signal: Option<i32>| Outcome::Crash {
        code,
        signal,
        excerpt: excerpt(if stderr.trim().is_empty() { stdout } else { stderr }),
    };
    if cmd
        .crash_patterns
        .iter()
        .any(|p| stdout.contains(p.as_str()) || stderr.contains(p.as_str()))
    {
        return crash(exit.code(), exit.signal());
    }
    if let Some(sig) = exit.signal() {
        return crash(None, Some(sig));
    }

    let mut status = None;
    let mut error = None;
    let lines: Vec<&str> = stdout.lines().collect();
    for (i, line) in lines.iter().enumerate() {
        match line.trim() {
            "sat" | "unsat" | "unknown" => {
                status = Some((line.trim(), i));
                break;
            }
            _ if is_error_line(line) && error.is_none() => error = Some(line.trim().to_string()),
            _ => {}
        }
    }
    if status.is_none() && error.is_none() {
        error = stderr.lines().find(|l| is_error_line(l)).map(|l| l.trim().to_string());
    }
    let code = exit.code().unwrap_or(-1);
    if let Some(message) = error {
        return Outcome::ParseRejected { message };
    }
    if code != 0 {
        return crash(Some(code), None);
    }
    match status {
        Some(("sat", i)) => {
            let model = want_model
                .then(|| lines[i + 1..].join("\n").trim().to_string())
                .filter(|m| m.starts_with('('));
            Outcome::Sat { model }
        }
        Some(("unsat", _)) => Outcome::Unsat,
        _ => Outcome::Unknown,
    }
}

fn read_pipe(pipe: Option<impl Read + Send + 'static>) -> std::thread::JoinHandle<String> {
    std::thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(mut p) = pipe {
            let _ = p.read_to_end(&mut buf);
        }
        String::from_utf8_lossy(&buf).into_owned()
    })
}

/// Runs one solver on `s` in a private temporary directory.
pub fn run_solver(cmd: &SolverCmd, s: &Script, want_model: bool) -> SolverVerdict {
    debug_assert!(!s.has_placeholder());
    run_solver_text(cmd, &solver_input(s, want_model), want_model)
}

/// As [`run_solver`] on raw input text.
pub fn run_solver_text(cmd: &SolverCmd, text: &str, want_model: bool) -> SolverVerdict {
    let start = Instant::now();
    let outcome = run_inner(cmd, text, want_model).unwrap_or_else(|e| Outcome::Crash {
        code: Some(-1),
        signal: None,
        excerpt: format!("spawn failure: {e}"),
    });
    SolverVerdict {
        outcome,
        wall_ms: start.elapsed().as_millis() as u64,
    }
}

fn run_inner(cmd: &SolverCmd, text: &str, want_model: bool) -> std::io::Result<Outcome> {
    let dir = tempfile::Builder::new().prefix("skelfuzz-run").tempdir()?;
    let file = dir.path().join("input.smt2");
    std::fs::write(&file, text)?;
    let file_str = file.to_string_lossy();
    let args: Vec<String> = cmd.args.iter().map(|a| a.replace("{file}", &file_str)).collect();

    let mut command = Command::new(&cmd.cmd);
    command
        .args(&args)
        .current_dir(dir.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .process_group(0);
    if let Some(mb) = cmd.mem_mb {
        let bytes = mb.saturating_mul(1024 * 1024) as libc::rlim_t;
        // SAFETY: setrlimit is async-signal-safe and touches no shared state.
        unsafe {
            command.pre_exec(move || {
                let lim = libc::rlimit {
                    rlim_cur: bytes,
                    rlim_max: bytes,
                };
                if libc::setrlimit(libc::RLIMIT_AS, &lim) != 0 {
                    return Err(std::io::Error::last_os_error());
                }
                Ok(())
            });
        }
    }
    let mut child = command.spawn()?;
    let out = read_pipe(child.stdout.take());
    let err = read_pipe(child.stderr.take());
    let status = child.wait_timeout(Duration::from_secs_f64(cmd.timeout_s))?;
    let status = match status {
        Some(s) => Some(s),
        None => {
            // SAFETY: signalling our own child's process group.
            unsafe {
                libc::kill(-(child.id() as libc::pid_t), libc::SIGKILL);
            }
            let _ = child.kill();
            let _ = child.wait();
            None
        }
    };
    let stdout = out.join().unwrap_or_default();
    let stderr = err.join().unwrap_or_default();
    Ok(interpret(cmd, status, &stdout, &stderr, want_model))
}

/// Runs every solver concurrently; results keep the solver order.
pub fn run_all(solvers: &[SolverCmd], s: &Script, want_model: bool) -> Vec<(String, SolverVerdict)> {
    let text = solver_input(s, want_model);
    std::thread::scope(|scope| {
        let handles: Vec<_> = solvers
            .iter()
            .map(|cmd| {
                let text = &text;
                scope.spawn(move || (cmd.name.clone(), run_solver_text(cmd, text, want_model)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    })
}
