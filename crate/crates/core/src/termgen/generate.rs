// SPDX-License-Identifier: Apache-2.0

//! Weighted top-down derivation and variable adaptation.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::Rng;
use thiserror::Error;

use super::grammar::{Production, TheoryGrammar, WeightedProduction};
use crate::smtlib::sexp::read_one;
use crate::smtlib::{fresh_name, parse_command, rename_free, Command, Literal, QualIdent, Sort, Term};

/// A Boolean term plus the declarations of its fresh variables.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedTerm {
    pub term: Term,
    pub decls: Vec<Command>,
    pub free_vars: Vec<(String, Sort)>,
}

impl GeneratedTerm {
    /// Wraps an existing term that declares nothing new.
    pub fn closed(term: Term) -> Self {
        GeneratedTerm {
            term,
            decls: Vec::new(),
            free_vars: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("nonterminal `{0}` has no terminal production at the depth limit")]
    DepthExhaustion(String),
    #[error("declaration template for `{sort}` failed to instantiate: {message}")]
    Template { sort: String, message: String },
}

/// Fresh-variable prefix for a sort.
pub fn sort_prefix(s: &Sort) -> String {
    match s.name.as_str() {
        "Int" => "int".into(),
        "Real" => "real".into(),
        "String" => "str".into(),
        "BitVec" => "bv".into(),
        "Bool" => "bool".into(),
        "Array" => "arr".into(),
        "RegLan" => "re".into(),
        other => other.to_ascii_lowercase(),
    }
}

const INT_POOL: &[i64] = &[-3, -2, -1, 0, 1, 2, 3];
const INT_BOUNDARY: &[&str] = &["2147483648", "9223372036854775808"];
const REAL_POOL: &[&str] = &["0.0", "1.0", "0.5", "2.0", "3.0", "2147483648.0"];
const STRING_POOL: &[&str] = &["", "a", "b", "0"];

fn negate(t: Term) -> Term {
    Term::app("-", vec![t])
}

/// Draws a literal of sort `s`. Callers guarantee the sort has a pool.
pub(crate) fn literal<R: Rng + ?Sized>(s: &Sort, rng: &mut R) -> Term {
    match (s.name.as_str(), s.params.as_slice()) {
        ("Bool", _) => Term::var(if rng.random_bool(0.5) { "true" } else { "false" }),
        ("Int", _) => {
            let i = rng.random_range(0..INT_POOL.len() + INT_BOUNDARY.len());
            match INT_POOL.get(i) {
                Some(&v) if v < 0 => negate(Term::numeral(v.unsigned_abs().to_string())),
                Some(&v) => Term::numeral(v.to_string()),
                None => Term::numeral(INT_BOUNDARY[i - INT_POOL.len()]),
            }
        }
        ("Real", _) => {
            let d = Term::Literal(Literal::Decimal(
                REAL_POOL[rng.random_range(0..REAL_POOL.len())].to_string(),
            ));
            if rng.random_bool(0.25) {
                negate(d)
            } else {
                d
            }
        }
        ("String", _) => Term::string(STRING_POOL[rng.random_range(0..STRING_POOL.len())]),
        ("RegLan", _) => Term::var(["re.none", "re.all", "re.allchar"][rng.random_range(0..3)]),
        ("BitVec", _) => {
            let w = s.bv_width().expect("validated width") as usize;
            let ones = rng.random_bool(0.5);
            if w.is_multiple_of(4) {
                Term::Literal(Literal::Hex((if ones { "F" } else { "0" }).repeat(w / 4)))
            } else {
                Term::Literal(Literal::Binary((if ones { "1" } else { "0" }).repeat(w)))
            }
        }
        ("Array", [_, elem]) => {
            let value = literal(elem, rng);
            Term::App(
                QualIdent {
                    id: crate::smtlib::Identifier::simple("const"),
                    sort: Some(s.clone()),
                },
                vec![value],
            )
        }
        ("Seq", [elem]) => {
            if rng.random_bool(0.5) {
                Term::Ident(QualIdent {
                    id: crate::smtlib::Identifier::simple("seq.empty"),
                    sort: Some(s.clone()),
                })
            } else {
                Term::app("seq.unit", vec![literal(elem, rng)])
            }
        }
        _ => unreachable!("sort {s} has no literal pool"),
    }
}

fn pick<'a, R: Rng + ?Sized>(prods: &[&'a WeightedProduction], rng: &mut R) -> &'a Production {
    let total: f64 = prods.iter().map(|p| p.weight).sum();
    let mut r = rng.random::<f64>() * total;
    for p in prods {
        if r < p.weight {
            return &p.production;
        }
        r -= p.weight;
    }
    &prods.last().expect("non-empty").production
}

struct Derivation<'g, R: ?Sized> {
    g: &'g TheoryGrammar,
    counters: HashMap<String, usize>,
    vars: Vec<(String, Sort)>,
    rng: &'g mut R,
}

impl<R: Rng + ?Sized> Derivation<'_, R> {
    fn derive(&mut self, nt: &str, depth: usize) -> Result<Term, GenerateError> {
        let prods = &self.g.rules[nt];
        let eligible: Vec<&WeightedProduction> = if depth >= self.g.max_depth {
            prods.iter().filter(|p| p.production.is_terminal()).collect()
        } else {
            prods.iter().collect()
        };
        if eligible.is_empty() {
            return Err(GenerateError::DepthExhaustion(nt.to_string()));
        }
        match pick(&eligible, self.rng) {
            Production::Op { head, children, .. } => {
                let args = children
                    .iter()
                    .map(|c| self.derive(c, depth + 1))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Term::App(head.clone(), args))
            }
            Production::Const { term, .. } => Ok(term.clone()),
            Production::Lit(s) => Ok(literal(s, self.rng)),
            Production::Var(s) => {
                let prefix = sort_prefix(s);
                let n = self.counters.entry(prefix.clone()).or_insert(0);
                let name = format!("{prefix}{n}");
                *n += 1;
                self.vars.push((name.clone(), s.clone()));
                Ok(Term::var(name))
            }
        }
    }
}

/// Declaration command for a fresh variable.
pub(crate) fn declaration(g: &TheoryGrammar, name: &str, sort: &Sort) -> Result<Command, GenerateError> {
    let Some(template) = g.decl_templates.get(sort) else {
        return Ok(Command::DeclareFun(name.to_string(), Vec::new(), sort.clone()));
    };
    let err = |message: String| GenerateError::Template {
        sort: sort.to_string(),
        message,
    };
    let form = read_one(&template.replace("{name}", name)).map_err(|e| err(e.to_string()))?;
    parse_command(&form)
        .map_err(|e| err(e.to_string()))?
        .ok_or_else(|| err("template produced no command".into()))
}

/// One weighted derivation from the start symbol. Variable slots become
/// fresh symbols `<prefix><counter>`, counted per prefix.
pub fn generate<R: Rng + ?Sized>(g: &TheoryGrammar, rng: &mut R) -> Result<GeneratedTerm, GenerateError> {
    let mut d = Derivation {
        g,
        counters: HashMap::new(),
        vars: Vec::new(),
        rng,
    };
    let term = d.derive(&g.start, 0)?;
    let decls = d
        .vars
        .iter()
        .map(|(n, s)| declaration(g, n, s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GeneratedTerm {
        term,
        decls,
        free_vars: d.vars,
    })
}

/// A copy of a declaration command with its symbol replaced.
pub fn renamed_decl(cmd: &Command, name: &str) -> Command {
    match cmd {
        Command::DeclareFun(_, args, ret) => Command::DeclareFun(name.to_string(), args.clone(), ret.clone()),
        Command::DeclareConst(_, sort) => Command::DeclareConst(name.to_string(), sort.clone()),
        other => other.clone(),
    }
}

/// Replaces fresh variables with sort-equal scope variables. Each free
/// variable with at least one candidate is adapted with probability
/// `p_adapt`, to a uniformly chosen candidate. Unadapted variables whose
/// names clash with a scope variable are renamed apart.
pub fn adapt_variables<R: Rng + ?Sized>(
    t: &GeneratedTerm,
    scope: &[(String, Sort)],
    rng: &mut R,
    p_adapt: f64,
) -> GeneratedTerm {
    let mut adapted: BTreeMap<&str, &str> = BTreeMap::new();
    for (name, sort) in &t.free_vars {
        let candidates: Vec<&str> = scope
            .iter()
            .filter(|(_, s)| s == sort)
            .map(|(n, _)| n.as_str())
            .collect();
        if candidates.is_empty() || !rng.random_bool(p_adapt) {
            continue;
        }
        adapted.insert(name, candidates[rng.random_range(0..candidates.len())]);
    }
    if adapted.is_empty() && !t.free_vars.iter().any(|(n, _)| scope.iter().any(|(s, _)| s == n)) {
        return t.clone();
    }
    let mut taken: HashSet<String> = scope
        .iter()
        .map(|(n, _)| n.clone())
        .chain(t.free_vars.iter().map(|(n, _)| n.clone()))
        .collect();
    let mut renamed: BTreeMap<String, String> = BTreeMap::new();
    for (name, _) in &t.free_vars {
        if adapted.contains_key(name.as_str()) || !scope.iter().any(|(s, _)| s == name) {
            continue;
        }
        let new = fresh_name(name, &taken);
        taken.insert(new.clone());
        renamed.insert(name.clone(), new);
    }
    let term = rename_free(&t.term, &|n| {
        adapted
            .get(n)
            .map(|s| s.to_string())
            .or_else(|| renamed.get(n).cloned())
    });
    let new_name = |n: &str| renamed.get(n).cloned().unwrap_or_else(|| n.to_string());
    GeneratedTerm {
        decls: t
            .decls
            .iter()
            .filter(|d| d.declared_symbol().is_none_or(|n| !adapted.contains_key(n)))
            .map(|d| match d.declared_symbol() {
                Some(n) => renamed_decl(d, &new_name(n)),
                None => d.clone(),
            })
            .collect(),
        free_vars: t
            .free_vars
            .iter()
            .filter(|(n, _)| !adapted.contains_key(n.as_str()))
            .map(|(n, s)| (new_name(n), s.clone()))
            .collect(),
        term,
    }
}
