// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const SAT_X: &str = "echo sat; if grep -q get-model \"$f\"; then echo '(model (define-fun x () Int 1))'; fi";
pub const UNSAT: &str = "echo unsat";
pub const CRASH: &str =
    "echo 'ASSERTION VIOLATION' >&2; echo 'File: /src/theory/arith.cpp' >&2; echo 'Line: 7' >&2; exit 134";

pub const SCRIPT: &str = "(declare-fun x () Int)
(assert (> x 0))
(assert (< x 5))
(check-sat)
";

pub fn skelfuzz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skelfuzz"))
        .args(args)
        .output()
        .expect("spawn skelfuzz")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited by signal")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Every stdout line parsed as JSON.
pub fn json_lines(o: &Output) -> Vec<serde_json::Value> {
    stdout(o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("not JSON: {l}: {e}")))
        .collect()
}

pub fn write_executable(path: &Path, body: &str) {
    std::fs::write(path, body).unwrap();
    std::fs::set_permissions(path, std::fs::Permissions::from_mode(0o755)).unwrap();
}

/// A sh solver: model-validation inputs (containing `define-fun`) run
/// `validate`, everything else runs `solve`. `$f` is the input file.
pub fn mock(dir: &Path, name: &str, solve: &str, validate: &str) -> PathBuf {
    let path = dir.join(format!("{name}.sh"));
    write_executable(
        &path,
        &format!("#!/bin/sh\nf=\"$1\"\nif grep -q define-fun \"$f\"; then\n  {validate}\nelse\n  {solve}\nfi\n"),
    );
    path
}

/// Writes `solvers.toml` listing `(name, executable)` pairs.
pub fn solvers_toml(dir: &Path, solvers: &[(&str, &Path)]) -> PathBuf {
    let mut text = String::new();
    for (name, cmd) in solvers {
        text.push_str(&format!(
            "[[solver]]\nname = \"{name}\"\ncmd = \"{}\"\ntimeout_s = 5\nversion = \"mock-1\"\n\n",
            cmd.display()
        ));
    }
    let path = dir.join("solvers.toml");
    std::fs::write(&path, text).unwrap();
    path
}

pub fn core_fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(rel)
}
