// SPDX-License-Identifier: Apache-2.0

//! Scripts and the declaration context derived from them.

use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use super::ast::{Command, DatatypeDef, Sort, Term};

/// Argument sorts and result sort of a function symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rank {
    pub args: Vec<Sort>,
    pub result: Sort,
}

impl Rank {
    pub fn constant(result: Sort) -> Self {
        Rank {
            args: Vec::new(),
            result,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    /// `declare-fun` / `declare-const`.
    Declared,
    /// `define-fun`.
    Defined,
    Constructor,
    Selector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunDecl {
    pub rank: Rank,
    pub kind: SymbolKind,
    /// Type parameters when the symbol belongs to a parametric datatype.
    pub params: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("symbol `{symbol}` redeclared with a conflicting rank")]
pub struct ConflictingDeclaration {
    pub symbol: String,
    /// Index of the offending command.
    pub command: usize,
}

/// Symbols, sorts and datatypes visible at the top level of a script.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeclContext {
    funs: IndexMap<String, FunDecl>,
    sorts: IndexMap<String, usize>,
    datatypes: IndexMap<String, DatatypeDef>,
}

impl DeclContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_commands(commands: &[Command]) -> Result<Self, ConflictingDeclaration> {
        let mut ctx = DeclContext::new();
        for (i, cmd) in commands.iter().enumerate() {
            ctx.add_command(cmd)
                .map_err(|symbol| ConflictingDeclaration { symbol, command: i })?;
        }
        Ok(ctx)
    }

    /// Registers the declarations of one command. Returns the conflicting
    /// symbol on a rank clash.
    pub fn add_command(&mut self, cmd: &Command) -> Result<(), String> {
        match cmd {
            Command::DeclareFun(name, args, ret) => self.insert(
                name,
                FunDecl {
                    rank: Rank {
                        args: args.clone(),
                        result: ret.clone(),
                    },
                    kind: SymbolKind::Declared,
                    params: Vec::new(),
                },
            ),
            Command::DeclareConst(name, sort) => self.insert(
                name,
                FunDecl {
                    rank: Rank::constant(sort.clone()),
                    kind: SymbolKind::Declared,
                    params: Vec::new(),
                },
            ),
            Command::DefineFun(name, params, ret, _) => self.insert(
                name,
                FunDecl {
                    rank: Rank {
                        args: params.iter().map(|p| p.sort.clone()).collect(),
                        result: ret.clone(),
                    },
                    kind: SymbolKind::Defined,
                    params: Vec::new(),
                },
            ),
            Command::DeclareSort(name, arity) => {
                self.sorts.insert(name.clone(), arity.parse().unwrap_or(0));
                Ok(())
            }
            Command::DeclareDatatypes(defs) => {
                for d in defs {
                    self.sorts.insert(d.name.clone(), d.params.len());
                }
                defs.iter().try_for_each(|d| self.add_datatype(d))
            }
            Command::DeclareDatatype(d) => {
                self.sorts.insert(d.name.clone(), d.params.len());
                self.add_datatype(d)
            }
            _ => Ok(()),
        }
    }

    fn add_datatype(&mut self, d: &DatatypeDef) -> Result<(), String> {
        let result = Sort::parametric(d.name.clone(), d.params.iter().map(Sort::simple).collect());
        for c in &d.constructors {
            self.insert(
                &c.name,
                FunDecl {
                    rank: Rank {
                        args: c.selectors.iter().map(|s| s.sort.clone()).collect(),
                        result: result.clone(),
                    },
                    kind: SymbolKind::Constructor,
                    params: d.params.clone(),
                },
            )?;
            for s in &c.selectors {
                self.insert(
                    &s.name,
                    FunDecl {
                        rank: Rank {
                            args: vec![result.clone()],
                            result: s.sort.clone(),
                        },
                        kind: SymbolKind::Selector,
                        params: d.params.clone(),
                    },
                )?;
            }
        }
        self.datatypes.insert(d.name.clone(), d.clone());
        Ok(())
    }

    fn insert(&mut self, name: &str, decl: FunDecl) -> Result<(), String> {
        match self.funs.get(name) {
            Some(existing) if existing.rank != decl.rank => Err(name.to_string()),
            Some(_) => Ok(()),
            None => {
                self.funs.insert(name.to_string(), decl);
                Ok(())
            }
        }
    }

    pub fn lookup(&self, symbol: &str) -> Option<&FunDecl> {
        self.funs.get(symbol)
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.funs.contains_key(symbol)
    }

    pub fn sort_arity(&self, name: &str) -> Option<usize> {
        self.sorts.get(name).copied()
    }

    pub fn datatype(&self, name: &str) -> Option<&DatatypeDef> {
        self.datatypes.get(name)
    }

    pub fn datatypes(&self) -> impl Iterator<Item = &DatatypeDef> {
        self.datatypes.values()
    }

    /// All function symbols in declaration order.
    pub fn symbols(&self) -> impl Iterator<Item = (&str, &FunDecl)> {
        self.funs.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Zero-arity `declare-fun`/`declare-const` symbols, i.e. the free
    /// variables of the script, in declaration order.
    pub fn variables(&self) -> impl Iterator<Item = (&str, &Sort)> {
        self.funs.iter().filter_map(|(k, v)| {
            (v.kind == SymbolKind::Declared && v.rank.args.is_empty()).then_some((k.as_str(), &v.rank.result))
        })
    }
}

/// An ordered list of commands plus its derived declaration context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Script {
    commands: Vec<Command>,
    decls: DeclContext,
}

impl Script {
    pub fn new(commands: Vec<Command>) -> Result<Self, ConflictingDeclaration> {
        let decls = DeclContext::from_commands(&commands)?;
        Ok(Script { commands, decls })
    }

    pub fn commands(&self) -> &[Command] {
        &self.commands
    }

    pub fn into_commands(self) -> Vec<Command> {
        self.commands
    }

    pub fn decls(&self) -> &DeclContext {
        &self.decls
    }

    pub fn asserts(&self) -> impl Iterator<Item = (usize, &Term)> {
        self.commands.iter().enumerate().filter_map(|(i, c)| match c {
            Command::Assert(t) => Some((i, t)),
            _ => None,
        })
    }

    pub fn has_placeholder(&self) -> bool {
        self.commands
            .iter()
            .any(|c| c.terms().into_iter().any(Term::has_placeholder))
    }

    pub fn logic(&self) -> Option<&str> {
        self.commands.iter().find_map(|c| match c {
            Command::SetLogic(l) => Some(l.as_str()),
            _ => None,
        })
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.commands.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}
