// SPDX-License-Identifier: Apache-2.0

//! Conversion from s-expressions to the SMT-LIB abstract syntax.

use super::ast::{
    Attribute, Command, Constructor, DatatypeDef, Identifier, Index, Literal, QualIdent, Quantifier, Sort, SortedVar,
    Term,
};
use super::context::Script;
use super::sexp::{read_all, read_one, Atom, ParseError, Sexp, SexpKind};

type Result<T> = std::result::Result<T, ParseError>;

/// Parses an SMT-LIB v2 script. Unknown commands become passthrough,
/// comments and `set-info` are dropped.
pub fn parse_script(text: &str) -> Result<Script> {
    let forms = read_all(text)?;
    let mut commands = Vec::with_capacity(forms.len());
    let mut positions = Vec::with_capacity(forms.len());
    for form in &forms {
        if let Some(cmd) = parse_command(form)? {
            commands.push(cmd);
            positions.push(form);
        }
    }
    Script::new(commands).map_err(|e| positions[e.command].error(e.to_string()))
}

/// Parses a single term from text.
pub fn parse_term_text(text: &str) -> Result<Term> {
    parse_term(&read_one(text)?)
}

/// Parses a single sort from text.
pub fn parse_sort_text(text: &str) -> Result<Sort> {
    parse_sort(&read_one(text)?)
}

/// Parses one command. Returns `None` for commands that are dropped.
pub fn parse_command(form: &Sexp) -> Result<Option<Command>> {
    let items = form.as_list().ok_or_else(|| form.error("expected a command"))?;
    let Some(name) = items.first().and_then(Sexp::as_symbol) else {
        return Err(form.error("expected a command name"));
    };
    let args = &items[1..];
    let arity = |n: usize| -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(form.error(format!("`{name}` expects {n} argument(s), found {}", args.len())))
        }
    };
    let cmd = match name {
        "set-info" => return Ok(None),
        "set-logic" => {
            arity(1)?;
            Command::SetLogic(symbol(&args[0])?)
        }
        "set-option" => {
            let key = args
                .first()
                .and_then(Sexp::as_keyword)
                .ok_or_else(|| form.error("set-option expects a keyword"))?;
            if args.len() > 2 {
                return Err(form.error("set-option takes at most one value"));
            }
            Command::SetOption(key.to_string(), args.get(1).cloned())
        }
        "declare-sort" => {
            if args.is_empty() || args.len() > 2 {
                return Err(form.error("declare-sort expects a name and an optional arity"));
            }
            let arity = match args.get(1) {
                Some(n) => n
                    .as_numeral()
                    .ok_or_else(|| n.error("expected a numeral arity"))?
                    .to_string(),
                None => "0".to_string(),
            };
            Command::DeclareSort(symbol(&args[0])?, arity)
        }
        "declare-fun" => {
            arity(3)?;
            let params = list(&args[1])?.iter().map(parse_sort).collect::<Result<Vec<_>>>()?;
            Command::DeclareFun(symbol(&args[0])?, params, parse_sort(&args[2])?)
        }
        "declare-const" => {
            arity(2)?;
            Command::DeclareConst(symbol(&args[0])?, parse_sort(&args[1])?)
        }
        "define-fun" => {
            arity(4)?;
            let params = list(&args[1])?
                .iter()
                .map(parse_sorted_var)
                .collect::<Result<Vec<_>>>()?;
            Command::DefineFun(symbol(&args[0])?, params, parse_sort(&args[2])?, parse_term(&args[3])?)
        }
        "declare-datatypes" => match parse_datatypes(args) {
            Some(defs) => Command::DeclareDatatypes(defs),
            None => Command::Passthrough(form.clone()),
        },
        "declare-datatype" => {
            let parsed = (args.len() == 2)
                .then(|| {
                    let name = args[0].as_symbol()?;
                    parse_datatype_body(name, &args[1])
                })
                .flatten();
            match parsed {
                Some(def) => Command::DeclareDatatype(def),
                None => Command::Passthrough(form.clone()),
            }
        }
        "assert" => {
            arity(1)?;
            Command::Assert(parse_term(&args[0])?)
        }
        "check-sat" => {
            arity(0)?;
            Command::CheckSat
        }
        "get-model" => {
            arity(0)?;
            Command::GetModel
        }
        _ => Command::Passthrough(form.clone()),
    };
    Ok(Some(cmd))
}

fn symbol(s: &Sexp) -> Result<String> {
    s.as_symbol()
        .map(str::to_string)
        .ok_or_else(|| s.error("expected a symbol"))
}

fn list(s: &Sexp) -> Result<&[Sexp]> {
    s.as_list().ok_or_else(|| s.error("expected a list"))
}

fn parse_index(s: &Sexp) -> Result<Index> {
    match &s.kind {
        SexpKind::Atom(Atom::Numeral(n)) => Ok(Index::Numeral(n.clone())),
        SexpKind::Atom(Atom::Symbol(n)) => Ok(Index::Symbol(n.clone())),
        SexpKind::Atom(a @ (Atom::Hex(_) | Atom::Binary(_))) => Ok(Index::Symbol(a.to_string())),
        _ => Err(s.error("expected an index")),
    }
}

/// `(_ sym idx+)` with the leading `_` already matched.
fn parse_indexed(form: &Sexp, items: &[Sexp]) -> Result<Identifier> {
    if items.len() < 3 {
        return Err(form.error("indexed identifier needs a symbol and at least one index"));
    }
    Ok(Identifier {
        symbol: symbol(&items[1])?,
        indices: items[2..].iter().map(parse_index).collect::<Result<_>>()?,
    })
}

pub fn parse_sort(s: &Sexp) -> Result<Sort> {
    match &s.kind {
        SexpKind::Atom(Atom::Symbol(name)) => Ok(Sort::simple(name.clone())),
        SexpKind::Atom(_) => Err(s.error("expected a sort")),
        SexpKind::List(items) => {
            let head = items.first().ok_or_else(|| s.error("empty sort"))?;
            if head.as_symbol() == Some("_") {
                let id = parse_indexed(s, items)?;
                return Ok(Sort {
                    name: id.symbol,
                    indices: id.indices,
                    params: Vec::new(),
                });
            }
            if items.len() < 2 {
                return Err(s.error("parametric sort needs at least one parameter"));
            }
            let mut base = parse_sort(head)?;
            if !base.params.is_empty() {
                return Err(head.error("malformed sort head"));
            }
            base.params = items[1..].iter().map(parse_sort).collect::<Result<_>>()?;
            Ok(base)
        }
    }
}

fn parse_sorted_var(s: &Sexp) -> Result<SortedVar> {
    match s.as_list() {
        Some([name, sort]) => Ok(SortedVar::new(symbol(name)?, parse_sort(sort)?)),
        _ => Err(s.error("expected (symbol sort)")),
    }
}

pub fn parse_qual_ident(s: &Sexp) -> Result<QualIdent> {
    match &s.kind {
        SexpKind::Atom(Atom::Symbol(name)) => Ok(QualIdent::simple(name.clone())),
        SexpKind::List(items) => match items.first().and_then(Sexp::as_symbol) {
            Some("_") => Ok(QualIdent {
                id: parse_indexed(s, items)?,
                sort: None,
            }),
            Some("as") => {
                if items.len() != 3 {
                    return Err(s.error("`as` expects an identifier and a sort"));
                }
                let inner = parse_qual_ident(&items[1])?;
                if inner.sort.is_some() {
                    return Err(items[1].error("nested `as`"));
                }
                Ok(QualIdent {
                    id: inner.id,
                    sort: Some(parse_sort(&items[2])?),
                })
            }
            _ => Err(s.error("expected an identifier")),
        },
        _ => Err(s.error("expected an identifier")),
    }
}

pub fn parse_term(s: &Sexp) -> Result<Term> {
    match &s.kind {
        SexpKind::Atom(atom) => match atom {
            Atom::Numeral(n) => Ok(Term::Literal(Literal::Numeral(n.clone()))),
            Atom::Decimal(d) => Ok(Term::Literal(Literal::Decimal(d.clone()))),
            Atom::Str(v) => Ok(Term::Literal(Literal::Str(v.clone()))),
            Atom::Hex(h) => Ok(Term::Literal(Literal::Hex(h.clone()))),
            Atom::Binary(b) => Ok(Term::Literal(Literal::Binary(b.clone()))),
            Atom::Symbol(name) => Ok(Term::var(name.clone())),
            Atom::Keyword(_) => Err(s.error("unexpected keyword in term position")),
        },
        SexpKind::List(items) => {
            let head = items.first().ok_or_else(|| s.error("empty application"))?;
            match head.as_symbol() {
                Some("_") | Some("as") => Ok(Term::Ident(parse_qual_ident(s)?)),
                Some("let") => {
                    if items.len() != 3 {
                        return Err(s.error("let expects bindings and a body"));
                    }
                    let binds = list(&items[1])?
                        .iter()
                        .map(|b| match b.as_list() {
                            Some([name, value]) => Ok((symbol(name)?, parse_term(value)?)),
                            _ => Err(b.error("expected (symbol term) binding")),
                        })
                        .collect::<Result<Vec<_>>>()?;
                    if binds.is_empty() {
                        return Err(items[1].error("let needs at least one binding"));
                    }
                    Ok(Term::Let(binds, Box::new(parse_term(&items[2])?)))
                }
                Some(q @ ("forall" | "exists")) => {
                    if items.len() != 3 {
                        return Err(s.error("quantifier expects variables and a body"));
                    }
                    let vars = list(&items[1])?
                        .iter()
                        .map(parse_sorted_var)
                        .collect::<Result<Vec<_>>>()?;
                    if vars.is_empty() {
                        return Err(items[1].error("quantifier needs at least one variable"));
                    }
                    let q = if q == "forall" {
                        Quantifier::Forall
                    } else {
                        Quantifier::Exists
                    };
                    Ok(Term::Quant(q, vars, Box::new(parse_term(&items[2])?)))
                }
                Some("!") => {
                    if items.len() < 2 {
                        return Err(s.error("annotation expects a term"));
                    }
                    let body = parse_term(&items[1])?;
                    let mut attrs = Vec::new();
                    let mut rest = items[2..].iter().peekable();
                    while let Some(k) = rest.next() {
                        let keyword = k.as_keyword().ok_or_else(|| k.error("expected an attribute keyword"))?;
                        let value = match rest.peek() {
                            Some(v) if v.as_keyword().is_none() => rest.next().cloned(),
                            _ => None,
                        };
                        attrs.push(Attribute {
                            keyword: keyword.to_string(),
                            value,
                        });
                    }
                    Ok(Term::Annotated(Box::new(body), attrs))
                }
                Some("match" | "lambda") => Ok(Term::Opaque(s.clone())),
                _ => {
                    let head = parse_qual_ident(head)?;
                    let args = items[1..].iter().map(parse_term).collect::<Result<_>>()?;
                    Ok(Term::App(head, args))
                }
            }
        }
    }
}

fn parse_constructor(s: &Sexp) -> Option<Constructor> {
    match &s.kind {
        // Bare constructor names are accepted for robustness.
        SexpKind::Atom(Atom::Symbol(n)) => Some(Constructor {
            name: n.clone(),
            selectors: Vec::new(),
        }),
        SexpKind::List(items) => {
            let name = items.first()?.as_symbol()?.to_string();
            let selectors = items[1..]
                .iter()
                .map(|sel| parse_sorted_var(sel).ok())
                .collect::<Option<Vec<_>>>()?;
            Some(Constructor { name, selectors })
        }
        _ => None,
    }
}

fn parse_datatype_body(name: &str, body: &Sexp) -> Option<DatatypeDef> {
    let items = body.as_list()?;
    let (params, ctors) = match items.first().and_then(Sexp::as_symbol) {
        Some("par") => {
            if items.len() != 3 {
                return None;
            }
            let params = items[1]
                .as_list()?
                .iter()
                .map(|p| p.as_symbol().map(str::to_string))
                .collect::<Option<Vec<_>>>()?;
            (params, items[2].as_list()?)
        }
        _ => (Vec::new(), items),
    };
    if ctors.is_empty() {
        return None;
    }
    let constructors = ctors.iter().map(parse_constructor).collect::<Option<Vec<_>>>()?;
    Some(DatatypeDef {
        name: name.to_string(),
        arity: params.len().to_string(),
        params,
        constructors,
    })
}

/// SMT-LIB 2.6 `declare-datatypes`; older forms fall back to passthrough.
fn parse_datatypes(args: &[Sexp]) -> Option<Vec<DatatypeDef>> {
    let [heads, bodies] = args else {
        return None;
    };
    let heads = heads.as_list()?;
    let bodies = bodies.as_list()?;
    if heads.is_empty() || heads.len() != bodies.len() {
        return None;
    }
    heads
        .iter()
        .zip(bodies)
        .map(|(h, body)| {
            let [name, arity] = h.as_list()? else {
                return None;
            };
            let name = name.as_symbol()?;
            let arity = arity.as_numeral()?;
            let def = parse_datatype_body(name, body)?;
            (def.arity == arity).then_some(def)
        })
        .collect()
}
