//! Front end: tokenizer and the two recursive-descent parsers.

mod brace;
mod cursor;
mod indent;
pub mod lexer;

use crate::ast::Program;
use serde::Serialize;
use std::fmt;

pub use brace::parse_brace;
pub use indent::parse_indent;

/// 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseError {
    pub span: Span,
    pub expected: String,
    pub found: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {} (expected {}, found {})",
            self.span.line, self.span.column, self.message, self.expected, self.found
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Syntax {
    Brace,
    Indent,
}

impl Syntax {
    pub fn name(self) -> &'static str {
        match self {
            Syntax::Brace => "brace",
            Syntax::Indent => "indent",
        }
    }
}

/// Brace iff the first token after the leading `vis` is `{`.
pub fn detect_syntax(text: &str) -> Result<Syntax, ParseError> {
    let tokens = lexer::scan(text)?;
    let first = &tokens[0];
    if first.kind != lexer::TokenKind::Ident("vis".into()) {
        return Err(ParseError {
            span: first.span,
            expected: "`vis`".into(),
            found: first.kind.describe(),
            message: "program must start with `vis`".into(),
        });
    }
    Ok(match tokens.get(1).map(|t| &t.kind) {
        Some(lexer::TokenKind::Punct('{')) => Syntax::Brace,
        _ => Syntax::Indent,
    })
}

pub fn parse_as(text: &str, syntax: Syntax) -> Result<Program, ParseError> {
    match syntax {
        Syntax::Brace => parse_brace(text),
        Syntax::Indent => parse_indent(text),
    }
}

/// Parses either syntax, choosing with [`detect_syntax`].
pub fn parse(text: &str) -> Result<Program, ParseError> {
    parse_as(text, detect_syntax(text)?)
}
