// SPDX-License-Identifier: Apache-2.0

//! SMT-LIB v2 parsing, sort checking, transformation and printing.

mod ast;
mod atoms;
mod context;
mod parse;
pub mod sexp;
mod theory;
mod typeck;

use thiserror::Error;

pub use ast::{
    Attribute, Command, Constructor, DatatypeDef, Identifier, Index, Literal, QualIdent, Quantifier, Sort, SortedVar,
    Term,
};
pub use atoms::{enumerate_atoms, free_vars, fresh_name, rename_free, AtomSite, TermPath};
pub use context::{ConflictingDeclaration, DeclContext, FunDecl, Rank, Script, SymbolKind};
pub use parse::{
    parse_command, parse_qual_ident, parse_script, parse_sort, parse_sort_text, parse_term, parse_term_text,
};
pub use sexp::{ParseError, Pos, Sexp};
pub use theory::{is_connective, logic_theories, Theory};
pub use typeck::{check_script, script_theories, sort_of, sort_of_lenient, term_theories, SortError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("script contains placeholder <p{0}> and cannot be printed for a solver")]
pub struct PlaceholderInScript(pub usize);

/// Canonical text of a placeholder-free script: one command per line,
/// single spaces between tokens.
pub fn print_script(s: &Script) -> Result<String, PlaceholderInScript> {
    for cmd in s.commands() {
        for t in cmd.terms() {
            let mut hole = None;
            t.walk(&mut |n| {
                if let (Term::Placeholder(id), None) = (n, hole) {
                    hole = Some(*id);
                }
            });
            if let Some(id) = hole {
                return Err(PlaceholderInScript(id));
            }
        }
    }
    Ok(s.to_string())
}
