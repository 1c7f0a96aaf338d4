use super::lexer::{Token, TokenKind};
use super::ParseError;
use crate::value::{Object, Value};

/// Token cursor with the value-level productions both syntaxes share.
/// Inside brackets the layout pass emits no layout tokens, so objects,
/// arrays and argument lists parse identically in either syntax; the only
/// difference is that the indentation syntax also accepts `=` between a
/// name and its value.
pub(super) struct Cursor<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    allow_equals: bool,
}

pub(super) type PResult<T> = Result<T, ParseError>;

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str, tokens: Vec<Token>, allow_equals: bool) -> Self {
        Cursor {
            src,
            tokens,
            pos: 0,
            allow_equals,
        }
    }

    pub fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    pub fn peek_at(&self, offset: usize) -> &Token {
        &self.tokens[(self.pos + offset).min(self.tokens.len() - 1)]
    }

    pub fn advance(&mut self) -> Token {
        let tok = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    pub fn error(&self, expected: impl Into<String>) -> ParseError {
        let tok = self.peek();
        ParseError {
            span: tok.span,
            expected: expected.into(),
            found: tok.kind.describe(),
            message: "unexpected token".into(),
        }
    }

    pub fn error_msg(&self, expected: impl Into<String>, message: impl Into<String>) -> ParseError {
        let mut err = self.error(expected);
        err.message = message.into();
        err
    }

    pub fn at_punct(&self, c: char) -> bool {
        self.peek().kind == TokenKind::Punct(c)
    }

    pub fn at_kind(&self, kind: &TokenKind) -> bool {
        &self.peek().kind == kind
    }

    pub fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(s) if s == kw)
    }

    pub fn keyword(&self) -> Option<&str> {
        match &self.peek().kind {
            TokenKind::Ident(s) => Some(s),
            _ => None,
        }
    }

    pub fn expect_punct(&mut self, c: char) -> PResult<()> {
        if self.at_punct(c) {
            self.advance();
            Ok(())
        } else {
            Err(self.error(format!("`{c}`")))
        }
    }

    pub fn expect_kind(&mut self, kind: TokenKind) -> PResult<()> {
        if self.at_kind(&kind) {
            self.advance();
            Ok(())
        } else {
            Err(self.error(kind.describe()))
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.at_keyword(kw) {
            self.advance();
            Ok(())
        } else {
            Err(self.error(format!("`{kw}`")))
        }
    }

    pub fn expect_ident(&mut self) -> PResult<String> {
        match self.peek().kind.clone() {
            TokenKind::Ident(s) => {
                self.advance();
                Ok(s)
            }
            _ => Err(self.error("identifier")),
        }
    }

    pub fn expect_string(&mut self) -> PResult<String> {
        match self.peek().kind.clone() {
            TokenKind::Str(s) => {
                self.advance();
                Ok(s)
            }
            _ => Err(self.error("string")),
        }
    }

    pub fn expect_eof(&mut self) -> PResult<()> {
        self.expect_kind(TokenKind::Eof)
    }

    /// `:` always; `=` too in the indentation syntax.
    pub fn expect_assign(&mut self) -> PResult<char> {
        match self.peek().kind {
            TokenKind::Punct(':') => {
                self.advance();
                Ok(':')
            }
            TokenKind::Punct('=') if self.allow_equals => {
                self.advance();
                Ok('=')
            }
            _ => Err(self.error(if self.allow_equals {
                "`=` or `:`"
            } else {
                "`:`"
            })),
        }
    }

    pub fn value(&mut self) -> PResult<Value> {
        match self.peek().kind.clone() {
            TokenKind::Str(s) => {
                self.advance();
                Ok(Value::Str(s))
            }
            TokenKind::Number(n) => {
                self.advance();
                Ok(Value::Number(n))
            }
            TokenKind::Ident(s) if s == "true" || s == "false" || s == "null" => {
                self.advance();
                Ok(match s.as_str() {
                    "true" => Value::Bool(true),
                    "false" => Value::Bool(false),
                    _ => Value::Null,
                })
            }
            TokenKind::Punct('{') => Ok(Value::Object(self.object()?)),
            TokenKind::Punct('[') => self.array(),
            _ => Err(self.error("value")),
        }
    }

    pub fn object(&mut self) -> PResult<Object> {
        self.expect_punct('{')?;
        let mut obj = Object::new();
        if self.at_punct('}') {
            self.advance();
            return Ok(obj);
        }
        loop {
            let (k, v) = self.named_arg()?;
            obj.push(k, v);
            if self.at_punct(',') {
                self.advance();
            } else {
                self.expect_punct('}')?;
                return Ok(obj);
            }
        }
    }

    fn array(&mut self) -> PResult<Value> {
        self.expect_punct('[')?;
        let mut items = Vec::new();
        if self.at_punct(']') {
            self.advance();
            return Ok(Value::Array(items));
        }
        loop {
            items.push(self.value()?);
            if self.at_punct(',') {
                self.advance();
            } else {
                self.expect_punct(']')?;
                return Ok(Value::Array(items));
            }
        }
    }

    pub fn named_arg(&mut self) -> PResult<(String, Value)> {
        let name = self.expect_ident()?;
        self.expect_assign()?;
        Ok((name, self.value()?))
    }

    /// `namedArg (',' namedArg)*`, stopping before `)`.
    pub fn arg_list(&mut self) -> PResult<Object> {
        let mut args = Object::new();
        loop {
            let (k, v) = self.named_arg()?;
            args.push(k, v);
            if self.at_punct(',') {
                self.advance();
            } else {
                return Ok(args);
            }
        }
    }

    /// `'(' argList? ')'` when `optional`, else `'(' argList ')'`.
    pub fn call_args(&mut self, optional: bool) -> PResult<Object> {
        self.expect_punct('(')?;
        if optional && self.at_punct(')') {
            self.advance();
            return Ok(Object::new());
        }
        let args = self.arg_list()?;
        self.expect_punct(')')?;
        Ok(args)
    }

    /// `'(' STRING (',' argList)? ')'`.
    pub fn string_call(&mut self) -> PResult<(String, Object)> {
        self.expect_punct('(')?;
        let s = self.expect_string()?;
        let args = if self.at_punct(',') {
            self.advance();
            self.arg_list()?
        } else {
            Object::new()
        };
        self.expect_punct(')')?;
        Ok((s, args))
    }

    /// Raw source text of the tokens before the first depth-0 token
    /// satisfying `stop`. Used for `where` clauses.
    pub fn raw_until(&mut self, stop: impl Fn(&TokenKind) -> bool) -> PResult<String> {
        let mut depth = 0usize;
        let mut first: Option<usize> = None;
        let mut last = 0usize;
        loop {
            let tok = self.peek();
            if tok.kind == TokenKind::Eof {
                if stop(&tok.kind) && depth == 0 {
                    break;
                }
                return Err(self.error("end of `where` clause"));
            }
            if depth == 0 && stop(&tok.kind) {
                break;
            }
            match tok.kind {
                TokenKind::Punct('(' | '[' | '{') => depth += 1,
                TokenKind::Punct(')' | ']' | '}') => {
                    if depth == 0 {
                        return Err(self.error("end of `where` clause"));
                    }
                    depth -= 1;
                }
                _ => {}
            }
            first.get_or_insert(tok.start);
            last = tok.end;
            self.advance();
        }
        Ok(first
            .map(|s| self.src[s..last].to_string())
            .unwrap_or_default())
    }
}
