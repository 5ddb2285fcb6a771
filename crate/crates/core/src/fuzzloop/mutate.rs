// SPDX-License-Identifier: Apache-2.0

//! One mutation: skeletonize, generate a term per hole, adapt, fill.

use std::collections::BTreeMap;

use rand::Rng;
use thiserror::Error;

use crate::skeleton::{fill, skeletonize, FillError, Skeleton, SkeletonError};
use crate::smtlib::Script;
use crate::termgen::{adapt_variables, generate, GenerateError, GeneratorSet, TheoryGrammar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MutateError {
    #[error(transparent)]
    NoAtoms(#[from] SkeletonError),
    #[error("no generators loaded")]
    NoGenerators,
    #[error("generation with `{theory}` failed: {source}")]
    Generate { theory: String, source: GenerateError },
    #[error(transparent)]
    Fill(#[from] FillError),
}

/// Removal and adaptation probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutationParams {
    pub p_remove: f64,
    pub p_adapt: f64,
}

impl Default for MutationParams {
    fn default() -> Self {
        MutationParams {
            p_remove: 0.5,
            p_adapt: 0.75,
        }
    }
}

/// Fills every hole of `sk` using `grammars[i]` for hole `i`.
pub fn fill_holes<R: Rng + ?Sized>(
    sk: &Skeleton,
    grammars: &[&TheoryGrammar],
    rng: &mut R,
    p_adapt: f64,
) -> Result<Script, MutateError> {
    let mut assignment = BTreeMap::new();
    for (hole, g) in sk.holes.iter().zip(grammars) {
        let t = generate(g, rng).map_err(|source| MutateError::Generate {
            theory: g.theory_name.clone(),
            source,
        })?;
        assignment.insert(hole.id, adapt_variables(&t, &hole.scope_vars, rng, p_adapt));
    }
    Ok(fill(sk, &assignment)?)
}

/// Skeletonizes `f`, then draws one grammar uniformly per hole (in hole
/// order) and fills each hole with an adapted term from it.
pub fn mutate_once<R: Rng + ?Sized>(
    f: &Script,
    gens: &GeneratorSet,
    rng: &mut R,
    params: &MutationParams,
) -> Result<Script, MutateError> {
    if gens.is_empty() {
        return Err(MutateError::NoGenerators);
    }
    let sk = skeletonize(f, rng, params.p_remove)?;
    let picks: Vec<&TheoryGrammar> = sk
        .holes
        .iter()
        .map(|_| &gens.grammars()[rng.random_range(0..gens.len())])
        .collect();
    fill_holes(&sk, &picks, rng, params.p_adapt)
}
