// SPDX-License-Identifier: Apache-2.0

//! Abstract syntax for SMT-LIB v2 scripts.
//!
//! `Display` on every node produces the canonical single-line form: tokens
//! separated by one space, one command per line for whole scripts.

use std::fmt;

use super::sexp::{write_string_literal, Sexp};

/// An index of an indexed identifier or sort, e.g. the `32` in `(_ BitVec 32)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Index {
    Numeral(String),
    Symbol(String),
}

impl Index {
    pub fn as_u64(&self) -> Option<u64> {
        match self {
            Index::Numeral(n) => n.parse().ok(),
            Index::Symbol(_) => None,
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Numeral(s) | Index::Symbol(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sort {
    pub name: String,
    pub indices: Vec<Index>,
    pub params: Vec<Sort>,
}

impl Sort {
    pub fn simple(name: impl Into<String>) -> Self {
        Sort {
            name: name.into(),
            indices: Vec::new(),
            params: Vec::new(),
        }
    }

    pub fn bool() -> Self {
        Sort::simple("Bool")
    }
    pub fn int() -> Self {
        Sort::simple("Int")
    }
    pub fn real() -> Self {
        Sort::simple("Real")
    }
    pub fn string() -> Self {
        Sort::simple("String")
    }
    pub fn reglan() -> Self {
        Sort::simple("RegLan")
    }

    pub fn bitvec(width: u64) -> Self {
        Sort {
            name: "BitVec".into(),
            indices: vec![Index::Numeral(width.to_string())],
            params: Vec::new(),
        }
    }

    pub fn array(index: Sort, element: Sort) -> Self {
        Sort {
            name: "Array".into(),
            indices: Vec::new(),
            params: vec![index, element],
        }
    }

    pub fn parametric(name: impl Into<String>, params: Vec<Sort>) -> Self {
        Sort {
            name: name.into(),
            indices: Vec::new(),
            params,
        }
    }

    pub fn is_bool(&self) -> bool {
        self.is_simple("Bool")
    }

    pub fn is_simple(&self, name: &str) -> bool {
        self.name == name && self.indices.is_empty() && self.params.is_empty()
    }

    /// Width of a `(_ BitVec w)` sort.
    pub fn bv_width(&self) -> Option<u64> {
        if self.name == "BitVec" && self.indices.len() == 1 && self.params.is_empty() {
            self.indices[0].as_u64()
        } else {
            None
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = if self.indices.is_empty() {
            self.name.clone()
        } else {
            let idx: Vec<String> = self.indices.iter().map(ToString::to_string).collect();
            format!("(_ {} {})", self.name, idx.join(" "))
        };
        if self.params.is_empty() {
            f.write_str(&head)
        } else {
            write!(f, "({head}")?;
            for p in &self.params {
                write!(f, " {p}")?;
            }
            f.write_str(")")
        }
    }
}

/// A possibly indexed function or constant symbol, e.g. `x` or `(_ extract 7 0)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Identifier {
    pub symbol: String,
    pub indices: Vec<Index>,
}

impl Identifier {
    pub fn simple(symbol: impl Into<String>) -> Self {
        Identifier {
            symbol: symbol.into(),
            indices: Vec::new(),
        }
    }

    pub fn is_simple(&self) -> bool {
        self.indices.is_empty()
    }
}

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.indices.is_empty() {
            f.write_str(&self.symbol)
        } else {
            write!(f, "(_ {}", self.symbol)?;
            for i in &self.indices {
                write!(f, " {i}")?;
            }
            f.write_str(")")
        }
    }
}

/// An identifier with an optional `(as id Sort)` annotation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QualIdent {
    pub id: Identifier,
    pub sort: Option<Sort>,
}

impl QualIdent {
    pub fn simple(symbol: impl Into<String>) -> Self {
        QualIdent {
            id: Identifier::simple(symbol),
            sort: None,
        }
    }

    pub fn symbol(&self) -> &str {
        &self.id.symbol
    }

    /// A plain unindexed, unannotated symbol reference.
    pub fn as_plain(&self) -> Option<&str> {
        (self.sort.is_none() && self.id.is_simple()).then_some(self.id.symbol.as_str())
    }
}

impl fmt::Display for QualIdent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.sort {
            Some(sort) => write!(f, "(as {} {})", self.id, sort),
            None => write!(f, "{}", self.id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    /// Exact decimal digits; never converted to a machine integer.
    Numeral(String),
    Decimal(String),
    Str(String),
    Binary(String),
    Hex(String),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Numeral(s) | Literal::Decimal(s) => f.write_str(s),
            Literal::Str(s) => write_string_literal(f, s),
            Literal::Binary(b) => write!(f, "#b{b}"),
            Literal::Hex(h) => write!(f, "#x{h}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantifier::Forall => "forall",
            Quantifier::Exists => "exists",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SortedVar {
    pub name: String,
    pub sort: Sort,
}

impl SortedVar {
    pub fn new(name: impl Into<String>, sort: Sort) -> Self {
        SortedVar {
            name: name.into(),
            sort,
        }
    }
}

impl fmt::Display for SortedVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {})", self.name, self.sort)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub keyword: String,
    pub value: Option<Sexp>,
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Some(v) => write!(f, "{} {}", self.keyword, v),
            None => f.write_str(&self.keyword),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Literal(Literal),
    Ident(QualIdent),
    App(QualIdent, Vec<Term>),
    Let(Vec<(String, Term)>, Box<Term>),
    Quant(Quantifier, Vec<SortedVar>, Box<Term>),
    Annotated(Box<Term>, Vec<Attribute>),
    /// Term forms outside the supported surface (`match`, `lambda`, ...),
    /// printed verbatim and never sort-checked.
    Opaque(Sexp),
    /// A skeleton hole. Never present in scripts handed to solvers.
    Placeholder(usize),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Ident(QualIdent::simple(name))
    }

    pub fn app(head: impl Into<String>, args: Vec<Term>) -> Self {
        Term::App(QualIdent::simple(head), args)
    }

    pub fn numeral(n: impl Into<String>) -> Self {
        Term::Literal(Literal::Numeral(n.into()))
    }

    pub fn string(s: impl Into<String>) -> Self {
        Term::Literal(Literal::Str(s.into()))
    }

    /// The head symbol for applications and identifiers.
    pub fn head_symbol(&self) -> Option<&str> {
        match self {
            Term::Ident(q) | Term::App(q, _) => Some(q.symbol()),
            _ => None,
        }
    }

    /// Direct children in path order. For `let`, binding values come first
    /// and the body last.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::App(_, args) => args.iter().collect(),
            Term::Let(binds, body) => binds
                .iter()
                .map(|(_, t)| t)
                .chain(std::iter::once(body.as_ref()))
                .collect(),
            Term::Quant(_, _, body) | Term::Annotated(body, _) => vec![body.as_ref()],
            _ => Vec::new(),
        }
    }

    pub fn child_mut(&mut self, i: usize) -> Option<&mut Term> {
        match self {
            Term::App(_, args) => args.get_mut(i),
            Term::Let(binds, body) => {
                if i < binds.len() {
                    Some(&mut binds[i].1)
                } else if i == binds.len() {
                    Some(body.as_mut())
                } else {
                    None
                }
            }
            Term::Quant(_, _, body) | Term::Annotated(body, _) => (i == 0).then_some(body.as_mut()),
            _ => None,
        }
    }

    pub fn child(&self, i: usize) -> Option<&Term> {
        self.children().get(i).copied()
    }

    pub fn at_path(&self, path: &[usize]) -> Option<&Term> {
        path.iter().try_fold(self, |t, &i| t.child(i))
    }

    pub fn at_path_mut(&mut self, path: &[usize]) -> Option<&mut Term> {
        let mut cur = self;
        for &i in path {
            cur = cur.child_mut(i)?;
        }
        Some(cur)
    }

    pub fn has_placeholder(&self) -> bool {
        match self {
            Term::Placeholder(_) => true,
            other => other.children().into_iter().any(Term::has_placeholder),
        }
    }

    /// Visits every node in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Literal(l) => write!(f, "{l}"),
            Term::Ident(q) => write!(f, "{q}"),
            Term::App(q, args) => {
                write!(f, "({q}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            Term::Let(binds, body) => {
                f.write_str("(let (")?;
                for (i, (name, value)) in binds.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "({name} {value})")?;
                }
                write!(f, ") {body})")
            }
            Term::Quant(q, vars, body) => {
                write!(f, "({q} (")?;
                for (i, v) in vars.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ") {body})")
            }
            Term::Annotated(body, attrs) => {
                write!(f, "(! {body}")?;
                for a in attrs {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            Term::Opaque(s) => write!(f, "{s}"),
            Term::Placeholder(id) => write!(f, "<p{id}>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constructor {
    pub name: String,
    pub selectors: Vec<SortedVar>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatatypeDef {
    pub name: String,
    pub arity: String,
    /// Type parameters of a `par` declaration.
    pub params: Vec<String>,
    pub constructors: Vec<Constructor>,
}

impl DatatypeDef {
    fn fmt_body(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.params.is_empty() {
            write!(f, "(par ({}) ", self.params.join(" "))?;
        }
        f.write_str("(")?;
        for (i, c) in self.constructors.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "({}", c.name)?;
            for s in &c.selectors {
                write!(f, " {s}")?;
            }
            f.write_str(")")?;
        }
        f.write_str(")")?;
        if !self.params.is_empty() {
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    SetLogic(String),
    SetOption(String, Option<Sexp>),
    DeclareSort(String, String),
    DeclareFun(String, Vec<Sort>, Sort),
    DeclareConst(String, Sort),
    DeclareDatatypes(Vec<DatatypeDef>),
    DeclareDatatype(DatatypeDef),
    DefineFun(String, Vec<SortedVar>, Sort, Term),
    Assert(Term),
    CheckSat,
    GetModel,
    /// Any other command, kept as its s-expression.
    Passthrough(Sexp),
}

impl Command {
    /// Name of the symbol introduced by a function or constant declaration.
    pub fn declared_symbol(&self) -> Option<&str> {
        match self {
            Command::DeclareFun(n, ..) | Command::DeclareConst(n, _) | Command::DefineFun(n, ..) => Some(n),
            _ => None,
        }
    }

    pub fn is_declaration(&self) -> bool {
        matches!(
            self,
            Command::DeclareSort(..)
                | Command::DeclareFun(..)
                | Command::DeclareConst(..)
                | Command::DeclareDatatypes(..)
                | Command::DeclareDatatype(..)
                | Command::DefineFun(..)
        )
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Command::Assert(t) | Command::DefineFun(_, _, _, t) => vec![t],
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::SetLogic(l) => write!(f, "(set-logic {l})"),
            Command::SetOption(k, Some(v)) => write!(f, "(set-option {k} {v})"),
            Command::SetOption(k, None) => write!(f, "(set-option {k})"),
            Command::DeclareSort(n, arity) => write!(f, "(declare-sort {n} {arity})"),
            Command::DeclareFun(n, args, ret) => {
                let args: Vec<String> = args.iter().map(ToString::to_string).collect();
                write!(f, "(declare-fun {n} ({}) {ret})", args.join(" "))
            }
            Command::DeclareConst(n, s) => write!(f, "(declare-const {n} {s})"),
            Command::DeclareDatatypes(defs) => {
                f.write_str("(declare-datatypes (")?;
                for (i, d) in defs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "({} {})", d.name, d.arity)?;
                }
                f.write_str(") (")?;
                for (i, d) in defs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    d.fmt_body(f)?;
                }
                f.write_str("))")
            }
            Command::DeclareDatatype(d) => {
                write!(f, "(declare-datatype {} ", d.name)?;
                d.fmt_body(f)?;
                f.write_str(")")
            }
            Command::DefineFun(n, params, ret, body) => {
                let params: Vec<String> = params.iter().map(ToString::to_string).collect();
                write!(f, "(define-fun {n} ({}) {ret} {body})", params.join(" "))
            }
            Command::Assert(t) => write!(f, "(assert {t})"),
            Command::CheckSat => f.write_str("(check-sat)"),
            Command::GetModel => f.write_str("(get-model)"),
            Command::Passthrough(s) => write!(f, "{s}"),
        }
    }
}
