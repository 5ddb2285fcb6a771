// SPDX-License-Identifier: Apache-2.0

//! Abstracting atoms into placeholders and filling them back in.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::smtlib::{
    check_script, enumerate_atoms, fresh_name, logic_theories, rename_free, script_theories, sort_of_lenient,
    term_theories, Command, ConflictingDeclaration, DeclContext, Script, Sort, SortError, SortedVar, Term, TermPath,
    Theory,
};
use crate::termgen::{renamed_decl, GeneratedTerm};

#[derive(Debug, Clone, PartialEq)]
pub struct Placeholder {
    pub id: usize,
    pub path: TermPath,
    /// Global variables followed by enclosing binders, innermost last.
    /// A binder shadows an earlier entry of the same name.
    pub scope_vars: Vec<(String, Sort)>,
    /// The removed atom.
    pub original: Term,
}

impl Placeholder {
    fn binders(&self) -> Vec<SortedVar> {
        self.scope_vars
            .iter()
            .map(|(n, s)| SortedVar::new(n.clone(), s.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    pub base: Script,
    pub holes: Vec<Placeholder>,
}

impl fmt::Display for Skeleton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SkeletonError {
    #[error("script has no atomic formulas to remove")]
    NoAtoms,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FillError {
    #[error("no term assigned to hole {0}")]
    MissingAssignment(usize),
    #[error("term for hole {hole} has sort {found}, expected Bool")]
    SortMismatch { hole: usize, found: Sort },
    #[error("term for hole {hole} does not sort-check: {source}")]
    IllSorted { hole: usize, source: SortError },
    #[error("filled script: {0}")]
    Conflict(#[from] ConflictingDeclaration),
    #[error("filled script does not sort-check: {0}")]
    Script(SortError),
}

/// Binder variables along `steps` from `root`, outermost first. `let`
/// bindings whose value sort cannot be determined are skipped.
fn binders_on_path(root: &Term, steps: &[usize], ctx: &DeclContext) -> Vec<(String, Sort)> {
    let mut out: Vec<(String, Sort)> = ctx.variables().map(|(n, s)| (n.to_string(), s.clone())).collect();
    let mut node = root;
    for &i in steps {
        match node {
            Term::Quant(_, vars, _) => {
                for v in vars {
                    push_scoped(&mut out, v.name.clone(), v.sort.clone());
                }
            }
            Term::Let(binds, _) if i == binds.len() => {
                let env: Vec<SortedVar> = out.iter().map(|(n, s)| SortedVar::new(n.clone(), s.clone())).collect();
                let sorted: Vec<(String, Option<Sort>)> = binds
                    .iter()
                    .map(|(n, v)| (n.clone(), sort_of_lenient(v, ctx, &env).ok().flatten()))
                    .collect();
                for (n, s) in sorted {
                    match s {
                        Some(s) => push_scoped(&mut out, n, s),
                        None => out.retain(|(m, _)| *m != n),
                    }
                }
            }
            _ => {}
        }
        node = node.child(i).expect("atom path is valid");
    }
    out
}

fn let_names_on_path(base: &Script, path: &TermPath) -> Vec<String> {
    let Some(Command::Assert(root)) = base.commands().get(path.command) else {
        return Vec::new();
    };
    let mut node = root;
    let mut out = Vec::new();
    for &i in &path.steps {
        if let Term::Let(binds, _) = node {
            if i == binds.len() {
                out.extend(binds.iter().map(|(n, _)| n.clone()));
            }
        }
        match node.child(i) {
            Some(c) => node = c,
            None => break,
        }
    }
    out
}

fn push_scoped(out: &mut Vec<(String, Sort)>, name: String, sort: Sort) {
    out.retain(|(n, _)| *n != name);
    out.push((name, sort));
}

/// Removes each atom with probability `p_remove`; if none is drawn, removes
/// one uniformly chosen atom.
pub fn skeletonize<R: Rng + ?Sized>(s: &Script, rng: &mut R, p_remove: f64) -> Result<Skeleton, SkeletonError> {
    let atoms = enumerate_atoms(s);
    if atoms.is_empty() {
        return Err(SkeletonError::NoAtoms);
    }
    let mut chosen: Vec<usize> = (0..atoms.len()).filter(|_| rng.random_bool(p_remove)).collect();
    if chosen.is_empty() {
        chosen.push(rng.random_range(0..atoms.len()));
    }
    let mut commands = s.commands().to_vec();
    let mut holes = Vec::with_capacity(chosen.len());
    for (id, &a) in chosen.iter().enumerate() {
        let site = &atoms[a];
        let Command::Assert(body) = &s.commands()[site.path.command] else {
            unreachable!("atoms live in asserts");
        };
        let scope_vars = binders_on_path(body, &site.path.steps, s.decls());
        let Command::Assert(target) = &mut commands[site.path.command] else {
            unreachable!();
        };
        *target.at_path_mut(&site.path.steps).expect("atom path is valid") = Term::Placeholder(id);
        holes.push(Placeholder {
            id,
            path: site.path.clone(),
            scope_vars,
            original: site.term.clone(),
        });
    }
    let base = Script::new(commands).expect("declarations unchanged");
    Ok(Skeleton { base, holes })
}

/// Replaces every placeholder with its assigned term. Declarations of the
/// terms are inserted before the first `assert`, renamed apart from every
/// symbol already in use. A `set-logic` is widened to `ALL` when the new
/// terms bring in theories the logic does not cover.
pub fn fill(sk: &Skeleton, assignment: &BTreeMap<usize, GeneratedTerm>) -> Result<Script, FillError> {
    let mut assigned = Vec::with_capacity(sk.holes.len());
    for h in &sk.holes {
        let t = assignment.get(&h.id).ok_or(FillError::MissingAssignment(h.id))?;
        assigned.push((h, t));
    }

    let mut taken: HashSet<String> = sk.base.decls().symbols().map(|(n, _)| n.to_string()).collect();
    for (h, t) in &assigned {
        taken.extend(h.scope_vars.iter().map(|(n, _)| n.clone()));
        taken.extend(t.decls.iter().filter_map(|d| d.declared_symbol().map(str::to_string)));
    }

    let mut ctx = sk.base.decls().clone();
    let mut new_decls = Vec::new();
    let mut terms = Vec::with_capacity(assigned.len());
    let mut inserted_theories = BTreeSet::new();
    for (h, t) in &assigned {
        let mut map = BTreeMap::new();
        for d in &t.decls {
            let Some(old) = d.declared_symbol() else {
                new_decls.push(d.clone());
                continue;
            };
            let new = fresh_name(old, &taken);
            taken.insert(new.clone());
            new_decls.push(renamed_decl(d, &new));
            map.insert(old.to_string(), new);
        }
        for d in &new_decls[new_decls.len() - t.decls.len()..] {
            ctx.add_command(d)
                .map_err(|symbol| ConflictingDeclaration { symbol, command: 0 })?;
        }
        let term = if map.is_empty() {
            t.term.clone()
        } else {
            rename_free(&t.term, &|n| map.get(n).cloned())
        };
        let binders = h.binders();
        match sort_of_lenient(&term, &ctx, &binders) {
            Ok(Some(s)) if !s.is_bool() => return Err(FillError::SortMismatch { hole: h.id, found: s }),
            Ok(_) => {}
            // Let-bound names of undetermined sort are absent from the
            // scope; the whole-script check below covers them.
            Err(SortError::Unbound(n)) if let_names_on_path(&sk.base, &h.path).contains(&n) => {}
            Err(source) => return Err(FillError::IllSorted { hole: h.id, source }),
        }
        inserted_theories.extend(term_theories(&term, &ctx, &binders));
        terms.push((h, term));
    }

    let mut commands = sk.base.commands().to_vec();
    for (h, term) in terms {
        let Command::Assert(body) = &mut commands[h.path.command] else {
            unreachable!("holes live in asserts");
        };
        let slot = body.at_path_mut(&h.path.steps).expect("hole path is valid");
        debug_assert_eq!(*slot, Term::Placeholder(h.id));
        *slot = term;
    }

    if let Some(i) = commands.iter().position(|c| matches!(c, Command::SetLogic(_))) {
        let Command::SetLogic(logic) = &commands[i] else {
            unreachable!();
        };
        if let Some(covered) = logic_theories(logic) {
            let present = script_theories(&sk.base);
            let widen = inserted_theories
                .iter()
                .any(|t| !covered.contains(t) && !present.contains(t) && *t != Theory::Core);
            if widen {
                commands[i] = Command::SetLogic("ALL".into());
            }
        }
    }

    let at = commands
        .iter()
        .position(|c| matches!(c, Command::Assert(_)))
        .unwrap_or(commands.len());
    commands.splice(at..at, new_decls);

    let script = Script::new(commands)?;
    check_script(&script).map_err(FillError::Script)?;
    Ok(script)
}

/// Fills every hole with the atom it replaced.
pub fn fill_with_originals(sk: &Skeleton) -> Result<Script, FillError> {
    let assignment = sk
        .holes
        .iter()
        .map(|h| (h.id, GeneratedTerm::closed(h.original.clone())))
        .collect();
    fill(sk, &assignment)
}
