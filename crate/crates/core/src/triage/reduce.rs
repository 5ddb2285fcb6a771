// SPDX-License-Identifier: Apache-2.0

//! Test-case reduction through an external delta debugger.

use std::path::Path;
use std::process::{Command, Stdio};

use crate::smtlib::{parse_script, Script};

/// Result of a reduction attempt. `script` is the original when the
/// reducer failed or its output was rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub script: Script,
    pub reduced: bool,
    pub warnings: Vec<String>,
}

fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

/// The interestingness test: runs `check_argv` with the candidate file
/// (first argument, or `bug.smt2` in the working directory) appended.
pub fn interestingness_script(check_argv: &[String]) -> String {
    let argv: Vec<String> = check_argv.iter().map(|a| shell_quote(a)).collect();
    format!("#!/bin/sh\nf=\"${{1:-bug.smt2}}\"\nexec {} \"$f\"\n", argv.join(" "))
}

/// Runs `template` (slots `{test}`, `{input}`, optional `{output}`; the
/// reducer works in place without `{output}`) and keeps its output only if
/// `still_reproduces` accepts it.
pub fn reduce(
    original: &Script,
    template: &str,
    check_argv: &[String],
    still_reproduces: &dyn Fn(&Script) -> bool,
) -> Reduction {
    let keep = |warning: String| {
        log::warn!("{warning}");
        Reduction {
            script: original.clone(),
            reduced: false,
            warnings: vec![warning],
        }
    };
    let dir = match tempfile::Builder::new().prefix("skelfuzz-reduce").tempdir() {
        Ok(d) => d,
        Err(e) => return keep(format!("cannot create reduction directory: {e}")),
    };
    let input = dir.path().join("bug.smt2");
    let output = dir.path().join("reduced.smt2");
    let test = dir.path().join("interesting.sh");
    if let Err(e) = write_inputs(original, check_argv, &input, &test) {
        return keep(format!("cannot write reduction inputs: {e}"));
    }
    let result_path = if template.contains("{output}") { &output } else { &input };
    let argv: Vec<String> = template
        .split_whitespace()
        .map(|w| {
            w.replace("{test}", &test.to_string_lossy())
                .replace("{input}", &input.to_string_lossy())
                .replace("{output}", &output.to_string_lossy())
        })
        .collect();
    let Some((prog, args)) = argv.split_first() else {
        return keep("empty reducer command".into());
    };
    let status = Command::new(prog)
        .args(args)
        .current_dir(dir.path())
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .output();
    match status {
        Err(e) => return keep(format!("reducer `{prog}` unavailable: {e}")),
        Ok(out) if !out.status.success() => {
            return keep(format!(
                "reducer exited with {}: {}",
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            ))
        }
        Ok(_) => {}
    }
    let text = match std::fs::read_to_string(result_path) {
        Ok(t) => t,
        Err(e) => return keep(format!("reducer produced no output: {e}")),
    };
    let candidate = match parse_script(&text) {
        Ok(s) => s,
        Err(e) => return keep(format!("reduced script does not parse: {e}")),
    };
    if !still_reproduces(&candidate) {
        return keep("reduced script no longer reproduces the bug; keeping the original".into());
    }
    Reduction {
        reduced: candidate != *original,
        script: candidate,
        warnings: Vec::new(),
    }
}

fn write_inputs(original: &Script, check_argv: &[String], input: &Path, test: &Path) -> std::io::Result<()> {
    use std::os::unix::fs::PermissionsExt;
    std::fs::write(input, format!("{original}\n"))?;
    std::fs::write(test, interestingness_script(check_argv))?;
    std::fs::set_permissions(test, std::fs::Permissions::from_mode(0o755))
}
