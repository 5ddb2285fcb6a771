// SPDX-License-Identifier: Apache-2.0

//! Seed-driven mutation loop.

mod corpus;
mod mutate;
mod run;

pub use corpus::{ingest_seeds, prefilter, CorpusError, Seed, SeedCorpus, Skipped};
pub use mutate::{fill_holes, mutate_once, MutateError, MutationParams};
pub use run::{
    fuzz, stats_line, with_progress, worker_rng, FuzzConfig, FuzzError, FuzzEvent, FuzzStats, Fuzzer, Mutant,
    MutantStream,
};
