//! Tokenizer shared by both surface syntaxes.
//!
//! [`scan`] produces the raw token stream used directly by the brace
//! parser. [`layout`] adds the `NEWLINE`/`INDENT`/`DEDENT` tokens the
//! indentation parser needs, following the offside rule: any consistent
//! increase in leading whitespace opens a block, a decrease must return
//! to a column that is already on the stack, and line breaks inside
//! `()`, `[]` or `{}` are ignored.

use super::{ParseError, Span};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Number(f64),
    Str(String),
    Punct(char),
    Newline,
    Indent,
    Dedent,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Number(n) => format!("number {n}"),
            TokenKind::Str(s) => format!("string {s:?}"),
            TokenKind::Punct(c) => format!("`{c}`"),
            TokenKind::Newline => "end of line".into(),
            TokenKind::Indent => "indent".into(),
            TokenKind::Dedent => "dedent".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
    /// Byte range of the lexeme in the source.
    pub start: usize,
    pub end: usize,
    /// A line break separates this token from the previous one.
    pub line_start: bool,
    /// Leading whitespace of this token's line contains a tab.
    pub tab_indent: bool,
}

struct Scanner<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Self {
        Scanner {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, offset: usize) -> Option<u8> {
        self.bytes.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span(&self) -> Span {
        Span {
            line: self.line,
            column: self.col,
        }
    }

    fn error(&self, span: Span, expected: &str, found: &str, message: &str) -> ParseError {
        ParseError {
            span,
            expected: expected.to_string(),
            found: found.to_string(),
            message: message.to_string(),
        }
    }

    /// Skips whitespace and comments. Returns (saw newline, tab seen in
    /// the whitespace after the last newline).
    fn skip_trivia(&mut self) -> Result<(bool, bool), ParseError> {
        let mut newline = false;
        let mut tab = false;
        loop {
            match self.peek() {
                Some('\n') => {
                    newline = true;
                    tab = false;
                    self.bump();
                }
                Some('\t') => {
                    tab = true;
                    self.bump();
                }
                Some(' ') | Some('\r') => {
                    self.bump();
                }
                Some('/') if self.peek_at(1) == Some(b'/') => {
                    while !matches!(self.peek(), None | Some('\n')) {
                        self.bump();
                    }
                }
                Some('/') if self.peek_at(1) == Some(b'*') => {
                    let span = self.span();
                    self.bump();
                    self.bump();
                    loop {
                        match self.peek() {
                            None => {
                                return Err(self.error(
                                    span,
                                    "`*/`",
                                    "end of input",
                                    "unterminated block comment",
                                ))
                            }
                            Some('*') if self.peek_at(1) == Some(b'/') => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            Some(c) => {
                                if c == '\n' {
                                    newline = true;
                                    tab = false;
                                }
                                self.bump();
                            }
                        }
                    }
                }
                _ => return Ok((newline, tab)),
            }
        }
    }

    fn number(&mut self) -> TokenKind {
        let start = self.pos;
        if matches!(self.peek(), Some('+') | Some('-')) {
            self.bump();
        }
        self.digits();
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|b| b.is_ascii_digit()) {
            self.bump();
            self.digits();
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            let sign = matches!(self.peek_at(1), Some(b'+') | Some(b'-'));
            let digit_at = if sign { 2 } else { 1 };
            if self.peek_at(digit_at).is_some_and(|b| b.is_ascii_digit()) {
                self.bump();
                if sign {
                    self.bump();
                }
                self.digits();
            }
        }
        let text = &self.src[start..self.pos];
        // The lexeme matches the NUMBER class, which f64 parsing accepts.
        TokenKind::Number(text.parse().unwrap_or(f64::NAN))
    }

    fn digits(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
    }

    fn string(&mut self, quote: char) -> Result<TokenKind, ParseError> {
        let span = self.span();
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                None => {
                    return Err(self.error(
                        span,
                        &format!("closing `{quote}`"),
                        "end of input",
                        "unterminated string",
                    ))
                }
                Some('\\') => match self.bump() {
                    None => {
                        return Err(self.error(
                            span,
                            &format!("closing `{quote}`"),
                            "end of input",
                            "unterminated string",
                        ))
                    }
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    Some('r') => out.push('\r'),
                    Some(c) => out.push(c),
                },
                Some(c) if c == quote => return Ok(TokenKind::Str(out)),
                Some(c) => out.push(c),
            }
        }
    }
}

/// Tokenizes `src` without layout tokens. The stream always ends in `Eof`.
pub fn scan(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut sc = Scanner::new(src);
    let mut tokens = Vec::new();
    let mut first = true;
    loop {
        let (newline, tab) = sc.skip_trivia()?;
        let line_start = newline || first;
        let tab_indent = if first && !newline {
            src[..sc.pos].contains('\t')
        } else {
            tab
        };
        first = false;
        let span = sc.span();
        let start = sc.pos;
        let kind = match sc.peek() {
            None => {
                tokens.push(Token {
                    kind: TokenKind::Eof,
                    span,
                    start,
                    end: start,
                    line_start,
                    tab_indent: false,
                });
                return Ok(tokens);
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                while sc
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
                {
                    sc.bump();
                }
                TokenKind::Ident(src[start..sc.pos].to_string())
            }
            Some(c) if c.is_ascii_digit() => sc.number(),
            Some('+') | Some('-') if sc.peek_at(1).is_some_and(|b| b.is_ascii_digit()) => {
                sc.number()
            }
            Some(q @ ('"' | '\'')) => sc.string(q)?,
            Some(c) => {
                sc.bump();
                TokenKind::Punct(c)
            }
        };
        tokens.push(Token {
            kind,
            span,
            start,
            end: sc.pos,
            line_start,
            tab_indent,
        });
    }
}

/// Inserts `NEWLINE`, `INDENT` and `DEDENT` tokens into a raw stream.
pub fn layout(raw: Vec<Token>) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::with_capacity(raw.len() + 16);
    let mut stack: Vec<usize> = vec![0];
    let mut depth = 0usize;
    let mut started = false;

    let synth = |kind: TokenKind, at: &Token| Token {
        kind,
        span: at.span,
        start: at.start,
        end: at.start,
        line_start: false,
        tab_indent: false,
    };

    for tok in raw {
        if tok.kind == TokenKind::Eof {
            if started {
                out.push(synth(TokenKind::Newline, &tok));
            }
            while stack.len() > 1 {
                stack.pop();
                out.push(synth(TokenKind::Dedent, &tok));
            }
            out.push(tok);
            return Ok(out);
        }
        if depth == 0 && tok.line_start {
            if tok.tab_indent {
                return Err(ParseError {
                    span: Span {
                        line: tok.span.line,
                        column: 1,
                    },
                    expected: "spaces".into(),
                    found: "tab".into(),
                    message: "tab in indentation".into(),
                });
            }
            let col = tok.span.column - 1;
            if started {
                out.push(synth(TokenKind::Newline, &tok));
            }
            let top = *stack.last().expect("indent stack never empty");
            if col > top {
                stack.push(col);
                out.push(synth(TokenKind::Indent, &tok));
            } else {
                while col < *stack.last().expect("indent stack never empty") {
                    stack.pop();
                    out.push(synth(TokenKind::Dedent, &tok));
                }
                if col != *stack.last().expect("indent stack never empty") {
                    return Err(ParseError {
                        span: tok.span,
                        expected: format!("indentation to column {}", stack.last().unwrap() + 1),
                        found: format!("column {}", col + 1),
                        message: "inconsistent dedent".into(),
                    });
                }
            }
            started = true;
        }
        match tok.kind {
            TokenKind::Punct('(' | '[' | '{') => depth += 1,
            TokenKind::Punct(')' | ']' | '}') => depth = depth.saturating_sub(1),
            _ => {}
        }
        out.push(tok);
    }
    unreachable!("scan always terminates the stream with Eof")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        scan(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    fn layout_kinds(src: &str) -> Result<Vec<TokenKind>, ParseError> {
        Ok(layout(scan(src)?)?.into_iter().map(|t| t.kind).collect())
    }

    #[test]
    fn numbers_follow_the_token_class() {
        assert_eq!(
            kinds("1 -2.5 +3e2 4.0E-1"),
            vec![
                TokenKind::Number(1.0),
                TokenKind::Number(-2.5),
                TokenKind::Number(300.0),
                TokenKind::Number(0.4),
                TokenKind::Eof
            ]
        );
        // a trailing dot is not part of the number
        assert_eq!(
            kinds("1."),
            vec![
                TokenKind::Number(1.0),
                TokenKind::Punct('.'),
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn strings_support_both_quotes_and_escapes() {
        assert_eq!(
            kinds(r#""a\"b" 'c\'d' "e\\f""#),
            vec![
                TokenKind::Str("a\"b".into()),
                TokenKind::Str("c'd".into()),
                TokenKind::Str("e\\f".into()),
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(
            kinds("a // line\n/* block\n */ b"),
            vec![
                TokenKind::Ident("a".into()),
                TokenKind::Ident("b".into()),
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn unterminated_string_is_an_error() {
        let err = scan("\"abc").unwrap_err();
        assert_eq!(err.message, "unterminated string");
    }

    #[test]
    fn layout_emits_balanced_indents() {
        let toks = layout_kinds("a:\n  b\n    c\n  d\ne\n").unwrap();
        let indents = toks.iter().filter(|k| **k == TokenKind::Indent).count();
        let dedents = toks.iter().filter(|k| **k == TokenKind::Dedent).count();
        assert_eq!(indents, 2);
        assert_eq!(indents, dedents);
    }

    #[test]
    fn newlines_inside_brackets_are_ignored() {
        let toks = layout_kinds("f(a,\n      b)\ng").unwrap();
        let newlines = toks.iter().filter(|k| **k == TokenKind::Newline).count();
        assert_eq!(newlines, 2);
        assert!(!toks.contains(&TokenKind::Indent));
    }

    #[test]
    fn dedent_to_unknown_column_is_rejected() {
        let err = layout_kinds("a\n  b\n    c\n   d\n").unwrap_err();
        assert_eq!(err.message, "inconsistent dedent");
        assert_eq!(err.span.line, 4);
    }

    #[test]
    fn tabs_in_indentation_are_rejected() {
        let err = layout_kinds("a\n\tb\n").unwrap_err();
        assert_eq!(err.message, "tab in indentation");
        let err = layout_kinds("a\n  \t b\n").unwrap_err();
        assert_eq!(err.message, "tab in indentation");
    }
}
