// SPDX-License-Identifier: Apache-2.0

//! Tokenizer and reader for SMT-LIB v2 s-expressions.
//!
//! Positions are 1-based (line, column) and count characters, not bytes.
//! Comments run from `;` to the end of the line and are discarded.

use std::fmt;

use thiserror::Error;

/// A 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Failure to read or interpret SMT-LIB text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message} (at `{token}`)")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    /// The offending token, or `<eof>` at end of input.
    pub token: String,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, token: impl Into<String>, message: impl Into<String>) -> Self {
        ParseError {
            line: pos.line,
            column: pos.column,
            token: token.into(),
            message: message.into(),
        }
    }
}

/// Lexical atom kinds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    /// Simple or `|quoted|` symbol, kept exactly as written.
    Symbol(String),
    /// `:keyword`, including the colon.
    Keyword(String),
    /// Unbounded decimal numeral, kept as text.
    Numeral(String),
    /// Decimal literal such as `1.0`, kept as text.
    Decimal(String),
    /// `#x...` literal; the digits only.
    Hex(String),
    /// `#b...` literal; the digits only.
    Binary(String),
    /// String literal contents with `""` escapes already collapsed.
    Str(String),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Symbol(s) | Atom::Keyword(s) | Atom::Numeral(s) | Atom::Decimal(s) => f.write_str(s),
            Atom::Hex(h) => write!(f, "#x{h}"),
            Atom::Binary(b) => write!(f, "#b{b}"),
            Atom::Str(s) => write_string_literal(f, s),
        }
    }
}

pub(crate) fn write_string_literal(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        if c == '"' {
            f.write_str("\"\"")?;
        } else {
            f.write_char(c)?;
        }
    }
    f.write_char('"')
}

/// An s-expression with the position of its first character.
#[derive(Debug, Clone)]
pub struct Sexp {
    pub kind: SexpKind,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub enum SexpKind {
    Atom(Atom),
    List(Vec<Sexp>),
}

impl PartialEq for Sexp {
    /// Structural equality; positions are ignored.
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}
impl Eq for Sexp {}

impl PartialEq for SexpKind {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (SexpKind::Atom(a), SexpKind::Atom(b)) => a == b,
            (SexpKind::List(a), SexpKind::List(b)) => a == b,
            _ => false,
        }
    }
}
impl Eq for SexpKind {}

impl Sexp {
    pub fn atom(atom: Atom) -> Self {
        Sexp {
            kind: SexpKind::Atom(atom),
            pos: Pos::default(),
        }
    }

    pub fn list(items: Vec<Sexp>) -> Self {
        Sexp {
            kind: SexpKind::List(items),
            pos: Pos::default(),
        }
    }

    pub fn symbol(s: impl Into<String>) -> Self {
        Sexp::atom(Atom::Symbol(s.into()))
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match &self.kind {
            SexpKind::Atom(Atom::Symbol(s)) => Some(s),
            _ => None,
        }
    }

    pub fn as_keyword(&self) -> Option<&str> {
        match &self.kind {
            SexpKind::Atom(Atom::Keyword(s)) => Some(s),
            _ => None,
        }
    }

    pub fn as_numeral(&self) -> Option<&str> {
        match &self.kind {
            SexpKind::Atom(Atom::Numeral(s)) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match &self.kind {
            SexpKind::List(items) => Some(items),
            _ => None,
        }
    }

    /// First token of this expression, for error messages.
    pub fn head_token(&self) -> String {
        match &self.kind {
            SexpKind::Atom(a) => a.to_string(),
            SexpKind::List(items) => match items.first() {
                Some(first) => format!("({}", first.head_token()),
                None => "()".to_string(),
            },
        }
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.pos, self.head_token(), message)
    }
}

impl fmt::Display for Sexp {
    /// Canonical form: single spaces between tokens, no newlines.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SexpKind::Atom(a) => write!(f, "{a}"),
            SexpKind::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open,
    Close,
    Atom(Atom),
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

fn is_symbol_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c) || (!c.is_ascii() && !c.is_whitespace())
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            pos: Pos { line: 1, column: 1 },
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut out = String::new();
        while let Some(&c) = self.chars.peek() {
            if !pred(c) {
                break;
            }
            out.push(c);
            self.bump();
        }
        out
    }

    fn next_token(&mut self) -> Result<Option<(Token, Pos)>, ParseError> {
        self.skip_trivia();
        let start = self.pos;
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        let token = match c {
            '(' => {
                self.bump();
                Token::Open
            }
            ')' => {
                self.bump();
                Token::Close
            }
            '"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(ParseError::new(self.pos, "<eof>", "unterminated string literal")),
                        Some('"') => {
                            if self.chars.peek() == Some(&'"') {
                                self.bump();
                                s.push('"');
                            } else {
                                break;
                            }
                        }
                        Some(c) => s.push(c),
                    }
                }
                Token::Atom(Atom::Str(s))
            }
            '|' => {
                self.bump();
                let mut s = String::from("|");
                loop {
                    match self.bump() {
                        None => return Err(ParseError::new(self.pos, "<eof>", "unterminated quoted symbol")),
                        Some('|') => break,
                        Some(c) => s.push(c),
                    }
                }
                s.push('|');
                Token::Atom(Atom::Symbol(s))
            }
            '#' => {
                self.bump();
                match self.bump() {
                    Some('x') => {
                        let digits = self.take_while(|c| c.is_ascii_hexdigit());
                        if digits.is_empty() {
                            return Err(ParseError::new(start, "#x", "empty hexadecimal literal"));
                        }
                        Token::Atom(Atom::Hex(digits))
                    }
                    Some('b') => {
                        let digits = self.take_while(|c| c == '0' || c == '1');
                        if digits.is_empty() {
                            return Err(ParseError::new(start, "#b", "empty binary literal"));
                        }
                        Token::Atom(Atom::Binary(digits))
                    }
                    other => {
                        let tok = format!("#{}", other.map(String::from).unwrap_or_default());
                        return Err(ParseError::new(start, tok, "malformed # literal"));
                    }
                }
            }
            ':' => {
                self.bump();
                let name = self.take_while(is_symbol_char);
                Token::Atom(Atom::Keyword(format!(":{name}")))
            }
            c if c.is_ascii_digit() => {
                let int = self.take_while(|c| c.is_ascii_digit());
                if self.chars.peek() == Some(&'.') {
                    self.bump();
                    let frac = self.take_while(|c| c.is_ascii_digit());
                    Token::Atom(Atom::Decimal(format!("{int}.{frac}")))
                } else {
                    Token::Atom(Atom::Numeral(int))
                }
            }
            c if is_symbol_char(c) => Token::Atom(Atom::Symbol(self.take_while(is_symbol_char))),
            other => return Err(ParseError::new(start, other.to_string(), "unexpected character")),
        };
        Ok(Some((token, start)))
    }
}

/// Reads every top-level s-expression in `text`.
pub fn read_all(text: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut lexer = Lexer::new(text);
    let mut stack: Vec<(Pos, Vec<Sexp>)> = Vec::new();
    let mut top = Vec::new();
    while let Some((token, pos)) = lexer.next_token()? {
        match token {
            Token::Open => stack.push((pos, Vec::new())),
            Token::Close => {
                let Some((open_pos, items)) = stack.pop() else {
                    return Err(ParseError::new(pos, ")", "unbalanced closing parenthesis"));
                };
                let sexp = Sexp {
                    kind: SexpKind::List(items),
                    pos: open_pos,
                };
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(sexp),
                    None => top.push(sexp),
                }
            }
            Token::Atom(atom) => {
                let sexp = Sexp {
                    kind: SexpKind::Atom(atom),
                    pos,
                };
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(sexp),
                    None => top.push(sexp),
                }
            }
        }
    }
    if let Some((open_pos, _)) = stack.last() {
        return Err(ParseError::new(
            lexer.pos,
            "<eof>",
            format!("unbalanced parenthesis: list opened at {open_pos} is never closed"),
        ));
    }
    Ok(top)
}

/// Reads exactly one s-expression.
pub fn read_one(text: &str) -> Result<Sexp, ParseError> {
    let mut all = read_all(text)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        0 => Err(ParseError::new(
            Pos { line: 1, column: 1 },
            "<eof>",
            "expected an s-expression",
        )),
        _ => Err(all[1].error("expected a single s-expression")),
    }
}
