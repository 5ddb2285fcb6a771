// SPDX-License-Identifier: Apache-2.0

//! Skeleton-guided, grammar-driven differential fuzzing of SMT solvers.

pub mod config;
pub mod difftest;
pub mod foundry;
pub mod fuzzloop;
pub mod skeleton;
pub mod smtlib;
pub mod termgen;
pub mod triage;
