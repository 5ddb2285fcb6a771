// SPDX-License-Identifier: Apache-2.0

//! Well-sortedness checking for terms and scripts.
//!
//! Applications of unknown function symbols are treated as opaque: their
//! sort is unknown and every check involving them is skipped. Unknown
//! nullary symbols are errors.

use std::collections::BTreeSet;

use thiserror::Error;

use super::ast::{Command, QualIdent, Sort, SortedVar, Term};
use super::context::{DeclContext, Script, SymbolKind};
use super::theory::{builtin_app, builtin_constant, compatible, theory_of_sort, Theory, Ty};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SortError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("ill-sorted term `{term}`: {reason}")]
    IllSorted { term: String, reason: String },
    #[error("sort of `{0}` cannot be determined (solver-specific term)")]
    Opaque(String),
}

fn excerpt(t: &Term) -> String {
    let s = t.to_string();
    if s.chars().count() > 160 {
        let cut: String = s.chars().take(157).collect();
        format!("{cut}...")
    } else {
        s
    }
}

fn ill(t: &Term, reason: impl Into<String>) -> SortError {
    SortError::IllSorted {
        term: excerpt(t),
        reason: reason.into(),
    }
}

pub(crate) struct Checker<'a> {
    ctx: &'a DeclContext,
    scope: Vec<(String, Ty)>,
    theories: Option<BTreeSet<Theory>>,
}

impl<'a> Checker<'a> {
    pub(crate) fn new(ctx: &'a DeclContext, binders: &[SortedVar]) -> Self {
        Checker {
            ctx,
            scope: binders.iter().map(|v| (v.name.clone(), Some(v.sort.clone()))).collect(),
            theories: None,
        }
    }

    fn collecting(mut self) -> Self {
        self.theories = Some(BTreeSet::new());
        self
    }

    fn note_sort(&mut self, s: &Sort) {
        let ctx = self.ctx;
        if let Some(out) = self.theories.as_mut() {
            if ctx.datatype(&s.name).is_some() {
                out.insert(Theory::Datatypes);
            } else if ctx.sort_arity(&s.name).is_some() {
                out.insert(Theory::Uninterpreted);
            } else {
                theory_of_sort(s, out);
            }
        }
    }

    fn note(&mut self, t: Theory) {
        if let Some(out) = self.theories.as_mut() {
            out.insert(t);
        }
    }

    fn lookup_scope(&self, name: &str) -> Option<&Ty> {
        self.scope.iter().rev().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    fn ident(&mut self, t: &Term, q: &QualIdent) -> Result<Ty, SortError> {
        if let Some(sort) = &q.sort {
            return Ok(Some(sort.clone()));
        }
        if q.id.is_simple() {
            if let Some(ty) = self.lookup_scope(&q.id.symbol) {
                return Ok(ty.clone());
            }
            if let Some(decl) = self.ctx.lookup(&q.id.symbol) {
                if !decl.rank.args.is_empty() {
                    return Err(ill(t, format!("function `{}` used without arguments", q.id.symbol)));
                }
                self.note_kind(decl.kind);
                if !decl.params.is_empty() {
                    return Ok(None);
                }
                return Ok(Some(decl.rank.result.clone()));
            }
        }
        match builtin_constant(&q.id.symbol, &q.id.indices) {
            Some(r) => r.map_err(|reason| ill(t, reason)),
            None if q.id.is_simple() => Err(SortError::Unbound(q.id.symbol.clone())),
            None => {
                self.note(Theory::Other(family(&q.id.symbol)));
                Ok(None)
            }
        }
    }

    fn note_kind(&mut self, kind: SymbolKind) {
        match kind {
            SymbolKind::Constructor | SymbolKind::Selector => self.note(Theory::Datatypes),
            SymbolKind::Declared | SymbolKind::Defined => {}
        }
    }

    fn app(&mut self, t: &Term, q: &QualIdent, args: &[Term]) -> Result<Ty, SortError> {
        let arg_tys = args.iter().map(|a| self.infer(a)).collect::<Result<Vec<_>, _>>()?;
        if let Some(sort) = &q.sort {
            return Ok(Some(sort.clone()));
        }
        let sym = q.id.symbol.as_str();
        if q.id.is_simple() {
            if self.lookup_scope(sym).is_some() {
                return Err(ill(t, format!("bound variable `{sym}` applied to arguments")));
            }
            if let Some(decl) = self.ctx.lookup(sym) {
                if decl.rank.args.len() != arg_tys.len() {
                    return Err(ill(
                        t,
                        format!(
                            "`{sym}` expects {} argument(s), found {}",
                            decl.rank.args.len(),
                            arg_tys.len()
                        ),
                    ));
                }
                let kind = decl.kind;
                let parametric = !decl.params.is_empty();
                let result = decl.rank.result.clone();
                if !parametric {
                    for (want, got) in decl.rank.args.iter().zip(&arg_tys) {
                        if !compatible(&Some(want.clone()), got) {
                            return Err(ill(
                                t,
                                format!("`{sym}` expects {want}, found {}", got.as_ref().unwrap()),
                            ));
                        }
                    }
                }
                self.note_kind(kind);
                if kind == SymbolKind::Declared && !arg_tys.is_empty() {
                    self.note(Theory::Uninterpreted);
                }
                return Ok((!parametric).then_some(result));
            }
            if let Some(ctor) = sym.strip_prefix("is-") {
                if self.is_constructor(ctor) && arg_tys.len() == 1 {
                    self.note(Theory::Datatypes);
                    return Ok(Some(Sort::bool()));
                }
            }
        } else if sym == "is" && q.id.indices.len() == 1 && arg_tys.len() == 1 {
            self.note(Theory::Datatypes);
            return Ok(Some(Sort::bool()));
        }
        match builtin_app(sym, &q.id.indices, &arg_tys) {
            Some(r) => r.map_err(|reason| ill(t, reason)),
            None => {
                self.note(Theory::Other(family(sym)));
                Ok(None)
            }
        }
    }

    fn is_constructor(&self, name: &str) -> bool {
        self.ctx.lookup(name).is_some_and(|d| d.kind == SymbolKind::Constructor)
    }

    pub(crate) fn infer(&mut self, t: &Term) -> Result<Ty, SortError> {
        let ty = match t {
            Term::Literal(l) => Some(match l {
                super::ast::Literal::Numeral(_) => Sort::int(),
                super::ast::Literal::Decimal(_) => Sort::real(),
                super::ast::Literal::Str(_) => Sort::string(),
                super::ast::Literal::Binary(b) => Sort::bitvec(b.len() as u64),
                super::ast::Literal::Hex(h) => Sort::bitvec(4 * h.len() as u64),
            }),
            Term::Placeholder(_) => Some(Sort::bool()),
            Term::Opaque(_) => {
                self.note(Theory::Other("opaque".into()));
                None
            }
            Term::Ident(q) => self.ident(t, q)?,
            Term::App(q, args) => self.app(t, q, args)?,
            Term::Let(binds, body) => {
                let tys = binds
                    .iter()
                    .map(|(_, v)| self.infer(v))
                    .collect::<Result<Vec<_>, _>>()?;
                let depth = self.scope.len();
                for ((name, _), ty) in binds.iter().zip(tys) {
                    self.scope.push((name.clone(), ty));
                }
                let r = self.infer(body);
                self.scope.truncate(depth);
                r?
            }
            Term::Quant(_, vars, body) => {
                self.note(Theory::Quantifiers);
                let depth = self.scope.len();
                for v in vars {
                    self.note_sort(&v.sort);
                    self.scope.push((v.name.clone(), Some(v.sort.clone())));
                }
                let r = self.infer(body);
                self.scope.truncate(depth);
                match r? {
                    Some(s) if !s.is_bool() => {
                        return Err(ill(t, format!("quantifier body has sort {s}, expected Bool")))
                    }
                    _ => Some(Sort::bool()),
                }
            }
            Term::Annotated(body, _) => self.infer(body)?,
        };
        if let Some(s) = &ty {
            self.note_sort(s);
        }
        Ok(ty)
    }
}

fn family(sym: &str) -> String {
    match sym.split_once('.') {
        Some((prefix, _)) if !prefix.is_empty() => prefix.to_string(),
        _ => sym.to_string(),
    }
}

/// Sort of `t` under `ctx` with `binders` in scope (innermost last).
pub fn sort_of(t: &Term, ctx: &DeclContext, binders: &[SortedVar]) -> Result<Sort, SortError> {
    Checker::new(ctx, binders)
        .infer(t)?
        .ok_or_else(|| SortError::Opaque(excerpt(t)))
}

/// Like [`sort_of`], but terms of undeterminable sort yield `Ok(None)`.
pub fn sort_of_lenient(t: &Term, ctx: &DeclContext, binders: &[SortedVar]) -> Result<Option<Sort>, SortError> {
    Checker::new(ctx, binders).infer(t)
}

/// Checks every assertion is Boolean and every definition body matches its
/// declared sort. Opaque terms pass.
pub fn check_script(s: &Script) -> Result<(), SortError> {
    let ctx = s.decls();
    for cmd in s.commands() {
        match cmd {
            Command::Assert(t) => match Checker::new(ctx, &[]).infer(t)? {
                Some(sort) if !sort.is_bool() => {
                    return Err(ill(t, format!("assertion has sort {sort}, expected Bool")))
                }
                _ => {}
            },
            Command::DefineFun(name, params, ret, body) => {
                let got = Checker::new(ctx, params).infer(body)?;
                if !compatible(&Some(ret.clone()), &got) {
                    return Err(ill(
                        body,
                        format!("body of `{name}` has sort {}, expected {ret}", got.unwrap()),
                    ));
                }
            }
            _ => {}
        }
    }
    Ok(())
}

/// Theories touched by the declarations and assertions of a script.
pub fn script_theories(s: &Script) -> BTreeSet<Theory> {
    let ctx = s.decls();
    let mut checker = Checker::new(ctx, &[]).collecting();
    for (_, decl) in ctx.symbols() {
        if decl.kind == SymbolKind::Declared && !decl.rank.args.is_empty() {
            checker.note(Theory::Uninterpreted);
        }
        for a in &decl.rank.args {
            checker.note_sort(a);
        }
        checker.note_sort(&decl.rank.result);
    }
    for cmd in s.commands() {
        for t in cmd.terms() {
            let _ = checker.infer(t);
        }
        if let Command::DefineFun(_, params, _, body) = cmd {
            let mut inner = Checker::new(ctx, params).collecting();
            let _ = inner.infer(body);
            if let (Some(out), Some(more)) = (checker.theories.as_mut(), inner.theories) {
                out.extend(more);
            }
        }
    }
    checker.theories.unwrap_or_default()
}

/// Theories touched by one term.
pub fn term_theories(t: &Term, ctx: &DeclContext, binders: &[SortedVar]) -> BTreeSet<Theory> {
    let mut checker = Checker::new(ctx, binders).collecting();
    let _ = checker.infer(t);
    checker.theories.unwrap_or_default()
}
