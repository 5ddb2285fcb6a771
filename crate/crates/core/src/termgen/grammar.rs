// SPDX-License-Identifier: Apache-2.0

//! The `.smtg` weighted grammar format.
//!
//! ```text
//! (grammar :theory Ints :start B :max-depth 6
//!   (rule B ((">=" I I) 2) (("(_ divisible 3)" I) 1))
//!   (rule I (("+" I I) 2) ((var Int) 3) ((lit Int) 2))
//!   (decl Int "(declare-const {name} Int)"))
//! ```
//!
//! An operator string with children is parsed as an application head. An
//! operator string without children is spliced as a complete term.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::smtlib::sexp::{read_all, read_one, Atom, SexpKind};
use crate::smtlib::{
    parse_command, parse_qual_ident, parse_sort, parse_term_text, Command, ParseError, QualIdent, Sexp, Sort, Term,
};

pub const DEFAULT_MAX_DEPTH: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub enum Production {
    /// Application of `head` to one derivation per child nonterminal.
    Op {
        text: String,
        head: QualIdent,
        children: Vec<String>,
    },
    /// A fixed term spliced verbatim.
    Const { text: String, term: Term },
    /// A fresh variable of the given sort.
    Var(Sort),
    /// A literal drawn from the sort's pool.
    Lit(Sort),
}

impl Production {
    pub fn is_terminal(&self) -> bool {
        !matches!(self, Production::Op { .. })
    }

    fn children(&self) -> &[String] {
        match self {
            Production::Op { children, .. } => children,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedProduction {
    pub production: Production,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryGrammar {
    pub theory_name: String,
    pub start: String,
    pub rules: IndexMap<String, Vec<WeightedProduction>>,
    /// Declaration templates keyed by variable sort; `{name}` is replaced
    /// by the fresh symbol.
    pub decl_templates: BTreeMap<Sort, String>,
    pub max_depth: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GrammarError {
    #[error("grammar text: {0}")]
    Parse(#[from] ParseError),
    #[error("malformed grammar: {0}")]
    Malformed(String),
    #[error("start nonterminal `{0}` has no rule")]
    MissingStart(String),
    #[error("nonterminal `{nonterminal}` used in rule `{rule}` has no rule")]
    Undefined { nonterminal: String, rule: String },
    #[error("nonterminal `{0}` is unreachable from the start symbol")]
    Unreachable(String),
    #[error("rule `{0}` has no productions")]
    EmptyRule(String),
    #[error("rule `{0}` is defined twice")]
    DuplicateRule(String),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("no literal pool for sort `{0}`")]
    NoLiteralPool(String),
    #[error("weight {weight} in rule `{rule}` is not positive")]
    NonPositiveWeight { rule: String, weight: f64 },
    #[error("operator `{text}`: {message}")]
    BadOperator { text: String, message: String },
    #[error("declaration template for `{sort}`: {message}")]
    BadTemplate { sort: String, message: String },
}

/// Sorts a variable slot may carry.
pub(crate) fn is_known_sort(s: &Sort) -> bool {
    match (s.name.as_str(), s.indices.len(), s.params.len()) {
        ("Bool" | "Int" | "Real" | "String" | "RegLan", 0, 0) => true,
        ("BitVec", 1, 0) => s.bv_width().is_some_and(|w| w > 0),
        ("Array", 0, 2) | ("Seq", 0, 1) => s.params.iter().all(is_known_sort),
        _ => false,
    }
}

/// Sorts with a literal pool.
pub(crate) fn has_literal_pool(s: &Sort) -> bool {
    match (s.name.as_str(), s.params.len()) {
        ("Array", 2) => is_known_sort(&s.params[0]) && has_literal_pool(&s.params[1]),
        ("Seq", 1) => has_literal_pool(&s.params[0]),
        _ => is_known_sort(s),
    }
}

/// Parses and validates grammar text.
pub fn load_grammar(text: &str) -> Result<TheoryGrammar, GrammarError> {
    let forms = read_all(text)?;
    let [form] = forms.as_slice() else {
        return Err(GrammarError::Malformed(format!(
            "expected exactly one (grammar ...) form, found {}",
            forms.len()
        )));
    };
    let items = form
        .as_list()
        .filter(|items| items.first().and_then(Sexp::as_symbol) == Some("grammar"))
        .ok_or_else(|| GrammarError::Malformed("expected (grammar ...)".into()))?;

    let mut theory = None;
    let mut start = None;
    let mut max_depth = DEFAULT_MAX_DEPTH;
    let mut rules: IndexMap<String, Vec<WeightedProduction>> = IndexMap::new();
    let mut decl_templates = BTreeMap::new();

    let mut i = 1;
    while i < items.len() {
        let item = &items[i];
        if let Some(key) = item.as_keyword() {
            let value = items
                .get(i + 1)
                .ok_or_else(|| GrammarError::Malformed(format!("{key} needs a value")))?;
            match key {
                ":theory" => theory = Some(symbol_of(value, ":theory")?),
                ":start" => start = Some(symbol_of(value, ":start")?),
                ":max-depth" => {
                    max_depth = value
                        .as_numeral()
                        .and_then(|n| n.parse::<usize>().ok())
                        .filter(|&d| d > 0)
                        .ok_or_else(|| GrammarError::Malformed(":max-depth must be a positive numeral".into()))?
                }
                other => return Err(GrammarError::Malformed(format!("unknown key {other}"))),
            }
            i += 2;
            continue;
        }
        let parts = item
            .as_list()
            .ok_or_else(|| GrammarError::Malformed(format!("unexpected `{item}`")))?;
        match parts.first().and_then(Sexp::as_symbol) {
            Some("rule") => {
                let name = parts
                    .get(1)
                    .map(|n| symbol_of(n, "rule"))
                    .transpose()?
                    .ok_or_else(|| GrammarError::Malformed("rule needs a nonterminal".into()))?;
                let prods = parts[2..]
                    .iter()
                    .map(|p| parse_production(p, &name))
                    .collect::<Result<Vec<_>, _>>()?;
                if prods.is_empty() {
                    return Err(GrammarError::EmptyRule(name));
                }
                if rules.insert(name.clone(), prods).is_some() {
                    return Err(GrammarError::DuplicateRule(name));
                }
            }
            Some("decl") => {
                let [_, sort, template] = parts else {
                    return Err(GrammarError::Malformed("decl needs a sort and a template".into()));
                };
                let sort = parse_sort(sort)?;
                let SexpKind::Atom(Atom::Str(template)) = &template.kind else {
                    return Err(GrammarError::Malformed("decl template must be a string".into()));
                };
                check_template(&sort, template)?;
                decl_templates.insert(sort, template.clone());
            }
            _ => return Err(GrammarError::Malformed(format!("unexpected `{item}`"))),
        }
        i += 1;
    }

    let g = TheoryGrammar {
        theory_name: theory.ok_or_else(|| GrammarError::Malformed("missing :theory".into()))?,
        start: start.ok_or_else(|| GrammarError::Malformed("missing :start".into()))?,
        rules,
        decl_templates,
        max_depth,
    };
    validate(&g)?;
    Ok(g)
}

fn symbol_of(s: &Sexp, what: &str) -> Result<String, GrammarError> {
    s.as_symbol()
        .map(str::to_string)
        .ok_or_else(|| GrammarError::Malformed(format!("{what} expects a symbol, found `{s}`")))
}

fn parse_production(p: &Sexp, rule: &str) -> Result<WeightedProduction, GrammarError> {
    let malformed = || GrammarError::Malformed(format!("production `{p}` in rule `{rule}`"));
    let [body, weight] = p.as_list().ok_or_else(malformed)? else {
        return Err(malformed());
    };
    let weight = match &weight.kind {
        SexpKind::Atom(Atom::Numeral(n) | Atom::Decimal(n)) => n.parse::<f64>().map_err(|_| malformed())?,
        SexpKind::List(items) => match items.as_slice() {
            // `(- 1)` style negative weights are accepted syntactically so
            // they can be rejected with a precise error.
            [minus, n] if minus.as_symbol() == Some("-") => match &n.kind {
                SexpKind::Atom(Atom::Numeral(n) | Atom::Decimal(n)) => -n.parse::<f64>().map_err(|_| malformed())?,
                _ => return Err(malformed()),
            },
            _ => return Err(malformed()),
        },
        _ => return Err(malformed()),
    };
    if !(weight > 0.0 && weight.is_finite()) {
        return Err(GrammarError::NonPositiveWeight {
            rule: rule.to_string(),
            weight,
        });
    }
    let body = body.as_list().ok_or_else(malformed)?;
    let production = match body {
        [head, rest @ ..] if matches!(head.kind, SexpKind::Atom(Atom::Str(_))) => {
            let SexpKind::Atom(Atom::Str(text)) = &head.kind else {
                unreachable!()
            };
            let children = rest
                .iter()
                .map(|c| symbol_of(c, "production child"))
                .collect::<Result<Vec<_>, _>>()?;
            let bad = |e: ParseError| GrammarError::BadOperator {
                text: text.clone(),
                message: e.message,
            };
            if children.is_empty() {
                Production::Const {
                    text: text.clone(),
                    term: parse_term_text(text).map_err(bad)?,
                }
            } else {
                Production::Op {
                    text: text.clone(),
                    head: parse_qual_ident(&read_one(text).map_err(bad)?).map_err(bad)?,
                    children,
                }
            }
        }
        [kind, sort] if matches!(kind.as_symbol(), Some("var" | "lit")) => {
            let sort = parse_sort(sort)?;
            if !is_known_sort(&sort) {
                return Err(GrammarError::UnknownSort(sort.to_string()));
            }
            if kind.as_symbol() == Some("var") {
                Production::Var(sort)
            } else {
                if !has_literal_pool(&sort) {
                    return Err(GrammarError::NoLiteralPool(sort.to_string()));
                }
                Production::Lit(sort)
            }
        }
        _ => return Err(malformed()),
    };
    Ok(WeightedProduction { production, weight })
}

fn check_template(sort: &Sort, template: &str) -> Result<(), GrammarError> {
    let bad = |message: String| GrammarError::BadTemplate {
        sort: sort.to_string(),
        message,
    };
    if !is_known_sort(sort) {
        return Err(GrammarError::UnknownSort(sort.to_string()));
    }
    let text = template.replace("{name}", "probe_name");
    let form = read_one(&text).map_err(|e| bad(e.to_string()))?;
    match parse_command(&form).map_err(|e| bad(e.to_string()))? {
        Some(cmd @ (Command::DeclareFun(..) | Command::DeclareConst(..)))
            if cmd.declared_symbol() == Some("probe_name") =>
        {
            Ok(())
        }
        _ => Err(bad("must declare `{name}` with declare-fun or declare-const".into())),
    }
}

fn validate(g: &TheoryGrammar) -> Result<(), GrammarError> {
    if !g.rules.contains_key(&g.start) {
        return Err(GrammarError::MissingStart(g.start.clone()));
    }
    for (rule, prods) in &g.rules {
        for p in prods {
            if let Some(c) = p.production.children().iter().find(|c| !g.rules.contains_key(*c)) {
                return Err(GrammarError::Undefined {
                    nonterminal: c.clone(),
                    rule: rule.clone(),
                });
            }
        }
    }
    let mut seen = BTreeSet::from([g.start.as_str()]);
    let mut queue = VecDeque::from([g.start.as_str()]);
    while let Some(nt) = queue.pop_front() {
        for p in &g.rules[nt] {
            for c in p.production.children() {
                if seen.insert(c.as_str()) {
                    queue.push_back(c.as_str());
                }
            }
        }
    }
    if let Some(unreached) = g.rules.keys().find(|k| !seen.contains(k.as_str())) {
        return Err(GrammarError::Unreachable(unreached.clone()));
    }
    Ok(())
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Production::Op { text, children, .. } => {
                write!(f, "({}", Term::string(text.clone()))?;
                for c in children {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
            Production::Const { text, .. } => write!(f, "({})", Term::string(text.clone())),
            Production::Var(s) => write!(f, "(var {s})"),
            Production::Lit(s) => write!(f, "(lit {s})"),
        }
    }
}

/// Prints the grammar back in the format accepted by [`load_grammar`].
impl fmt::Display for TheoryGrammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(grammar :theory {} :start {} :max-depth {}",
            self.theory_name, self.start, self.max_depth
        )?;
        for (name, prods) in &self.rules {
            write!(f, "\n  (rule {name}")?;
            for p in prods {
                write!(f, "\n    ({} {})", p.production, p.weight)?;
            }
            f.write_str(")")?;
        }
        for (sort, template) in &self.decl_templates {
            write!(f, "\n  (decl {sort} {})", Term::string(template.clone()))?;
        }
        f.write_str(")")
    }
}
