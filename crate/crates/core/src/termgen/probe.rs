// SPDX-License-Identifier: Apache-2.0

//! Sampling grammars into standalone probe scripts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::generate::{generate, GenerateError, GeneratedTerm};
use super::grammar::TheoryGrammar;
use crate::smtlib::{Command, ConflictingDeclaration, Script};

pub type Probe = Result<GeneratedTerm, GenerateError>;

/// `n` derivations from one rng stream seeded with `seed`.
pub fn sample_probes(g: &TheoryGrammar, n: usize, seed: u64) -> Vec<Probe> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| generate(g, &mut rng)).collect()
}

/// `(set-logic ALL)`, the term's declarations, `(assert t)`, `(check-sat)`.
pub fn probe_script(t: &GeneratedTerm) -> Result<Script, ConflictingDeclaration> {
    let mut cmds = Vec::with_capacity(t.decls.len() + 3);
    cmds.push(Command::SetLogic("ALL".into()));
    cmds.extend(t.decls.iter().cloned());
    cmds.push(Command::Assert(t.term.clone()));
    cmds.push(Command::CheckSat);
    Script::new(cmds)
}
