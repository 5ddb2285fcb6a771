// SPDX-License-Identifier: Apache-2.0

//! Atomic-formula enumeration, free variables and fresh naming.

use std::collections::HashSet;

use super::ast::{Sort, Term};
use super::context::{DeclContext, Script, SymbolKind};
use super::theory::{builtin_constant, is_connective};
use super::typeck::SortError;

/// Location of a subterm: the command index of an `assert` plus the
/// child-index path from its body.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermPath {
    pub command: usize,
    pub steps: Vec<usize>,
}

impl TermPath {
    /// Whether one path is a prefix of the other.
    pub fn overlaps(&self, other: &TermPath) -> bool {
        self.command == other.command && (self.steps.starts_with(&other.steps) || other.steps.starts_with(&self.steps))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomSite {
    pub path: TermPath,
    pub term: Term,
}

/// Every maximal Boolean subterm of every assertion whose head is not a
/// connective. Descends through connectives, quantifier bodies, `let`
/// bodies and annotations.
pub fn enumerate_atoms(s: &Script) -> Vec<AtomSite> {
    let mut out = Vec::new();
    for (command, body) in s.asserts() {
        let mut steps = Vec::new();
        collect(body, command, &mut steps, &mut out);
    }
    out
}

fn collect(t: &Term, command: usize, steps: &mut Vec<usize>, out: &mut Vec<AtomSite>) {
    let mut descend = |i: usize, child: &Term, out: &mut Vec<AtomSite>| {
        steps.push(i);
        collect(child, command, steps, out);
        steps.pop();
    };
    match t {
        Term::App(q, args) if q.sort.is_none() && q.id.is_simple() && is_connective(q.symbol()) => {
            for (i, a) in args.iter().enumerate() {
                descend(i, a, out);
            }
        }
        Term::Quant(_, _, body) | Term::Annotated(body, _) => descend(0, body, out),
        Term::Let(binds, body) => descend(binds.len(), body, out),
        Term::Placeholder(_) => {}
        _ => out.push(AtomSite {
            path: TermPath {
                command,
                steps: steps.clone(),
            },
            term: t.clone(),
        }),
    }
}

/// Globally declared zero-arity symbols occurring free in `t`, in order of
/// first occurrence.
pub fn free_vars(t: &Term, ctx: &DeclContext) -> Result<Vec<(String, Sort)>, SortError> {
    let mut out = Vec::new();
    let mut bound = Vec::new();
    walk_free(t, ctx, &mut bound, &mut out)?;
    Ok(out)
}

fn walk_free(
    t: &Term,
    ctx: &DeclContext,
    bound: &mut Vec<String>,
    out: &mut Vec<(String, Sort)>,
) -> Result<(), SortError> {
    match t {
        Term::Ident(q) => {
            let Some(name) = q.as_plain() else {
                return Ok(());
            };
            if bound.iter().any(|b| b == name) {
                return Ok(());
            }
            match ctx.lookup(name) {
                Some(d) if d.kind == SymbolKind::Declared && d.rank.args.is_empty() => {
                    if !out.iter().any(|(n, _)| n == name) {
                        out.push((name.to_string(), d.rank.result.clone()));
                    }
                }
                Some(_) => {}
                None if builtin_constant(name, &[]).is_some() => {}
                None => return Err(SortError::Unbound(name.to_string())),
            }
        }
        Term::App(_, args) => {
            for a in args {
                walk_free(a, ctx, bound, out)?;
            }
        }
        Term::Let(binds, body) => {
            for (_, v) in binds {
                walk_free(v, ctx, bound, out)?;
            }
            let depth = bound.len();
            bound.extend(binds.iter().map(|(n, _)| n.clone()));
            let r = walk_free(body, ctx, bound, out);
            bound.truncate(depth);
            r?;
        }
        Term::Quant(_, vars, body) => {
            let depth = bound.len();
            bound.extend(vars.iter().map(|v| v.name.clone()));
            let r = walk_free(body, ctx, bound, out);
            bound.truncate(depth);
            r?;
        }
        Term::Annotated(body, _) => walk_free(body, ctx, bound, out)?,
        Term::Literal(_) | Term::Opaque(_) | Term::Placeholder(_) => {}
    }
    Ok(())
}

/// `base` if unused; otherwise `base` with its trailing digits replaced by
/// the smallest positive integer that yields an unused name.
pub fn fresh_name(base: &str, taken: &HashSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    (1u64..)
        .map(|k| format!("{stem}{k}"))
        .find(|cand| !taken.contains(cand))
        .expect("unbounded suffix search")
}

/// Replaces free occurrences of variables according to `map`.
pub fn rename_free(t: &Term, map: &dyn Fn(&str) -> Option<String>) -> Term {
    fn go(t: &Term, map: &dyn Fn(&str) -> Option<String>, bound: &mut Vec<String>) -> Term {
        match t {
            Term::Ident(q) => match q.as_plain() {
                Some(name) if !bound.iter().any(|b| b == name) => match map(name) {
                    Some(new) => Term::var(new),
                    None => t.clone(),
                },
                _ => t.clone(),
            },
            Term::App(q, args) => Term::App(q.clone(), args.iter().map(|a| go(a, map, bound)).collect()),
            Term::Let(binds, body) => {
                let binds: Vec<_> = binds.iter().map(|(n, v)| (n.clone(), go(v, map, bound))).collect();
                let depth = bound.len();
                bound.extend(binds.iter().map(|(n, _)| n.clone()));
                let body = go(body, map, bound);
                bound.truncate(depth);
                Term::Let(binds, Box::new(body))
            }
            Term::Quant(q, vars, body) => {
                let depth = bound.len();
                bound.extend(vars.iter().map(|v| v.name.clone()));
                let body = go(body, map, bound);
                bound.truncate(depth);
                Term::Quant(*q, vars.clone(), Box::new(body))
            }
            Term::Annotated(body, attrs) => Term::Annotated(Box::new(go(body, map, bound)), attrs.clone()),
            other => other.clone(),
        }
    }
    go(t, map, &mut Vec::new())
}
