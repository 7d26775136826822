//! Tokenizer and angle-expression parser shared by the RSQASM and flat QASM
//! front ends.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Tok<'a> {
    Ident(&'a str),
    Number(&'a str),
    Str(&'a str),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Plus,
    Minus,
    Star,
    Slash,
    Arrow,
}

impl Tok<'_> {
    pub(crate) fn describe(&self) -> &str {
        match self {
            Tok::Ident(s) | Tok::Number(s) => s,
            Tok::Str(_) => "string literal",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Comma => "`,`",
            Tok::Semi => "`;`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::Arrow => "`->`",
        }
    }
}

/// A token with its 1-based source position. Columns count characters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Token<'a> {
    pub tok: Tok<'a>,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LexError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl LexError {
    pub(crate) fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        LexError {
            line,
            column,
            message: message.into(),
        }
    }
}

/// Tokenizes one source line. A `//` comment runs to the end of the line.
pub(crate) fn tokenize_line(line: &str, line_no: usize) -> Result<Vec<Token<'_>>, LexError> {
    let mut out = Vec::new();
    let mut chars = line.char_indices().peekable();
    let mut column = 0usize;
    while let Some((start, c)) = chars.next() {
        column += 1;
        let col = column;
        let single = match c {
            c if c.is_whitespace() => continue,
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            '+' => Some(Tok::Plus),
            '*' => Some(Tok::Star),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token {
                tok,
                line: line_no,
                column: col,
            });
            continue;
        }
        let tok = match c {
            '/' => {
                if matches!(chars.peek(), Some((_, '/'))) {
                    break;
                }
                Tok::Slash
            }
            '-' => {
                if matches!(chars.peek(), Some((_, '>'))) {
                    chars.next();
                    column += 1;
                    Tok::Arrow
                } else {
                    Tok::Minus
                }
            }
            '"' => {
                let mut end = None;
                for (i, ch) in chars.by_ref() {
                    column += 1;
                    if ch == '"' {
                        end = Some(i);
                        break;
                    }
                }
                match end {
                    Some(end) => Tok::Str(&line[start + 1..end]),
                    None => return Err(LexError::new(line_no, col, "unterminated string literal")),
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut end = start + c.len_utf8();
                while let Some(&(i, ch)) = chars.peek() {
                    if ch.is_ascii_alphanumeric() || ch == '_' {
                        chars.next();
                        column += 1;
                        end = i + ch.len_utf8();
                    } else {
                        break;
                    }
                }
                Tok::Ident(&line[start..end])
            }
            c if c.is_ascii_digit() || c == '.' => {
                let end = scan_number(line, start);
                if end == start || (end == start + 1 && c == '.') {
                    return Err(LexError::new(line_no, col, "malformed number"));
                }
                // The first character has already been consumed.
                let extra = line[start + 1..end].chars().count();
                for _ in 0..extra {
                    chars.next();
                }
                column += extra;
                Tok::Number(&line[start..end])
            }
            other => {
                return Err(LexError::new(
                    line_no,
                    col,
                    alloc::format!("unexpected character `{}`", other.escape_default()),
                ))
            }
        };
        out.push(Token {
            tok,
            line: line_no,
            column: col,
        });
    }
    Ok(out)
}

/// Returns the end offset of a decimal literal `d+[.d*][e[+-]d+]` or `.d+[...]`.
fn scan_number(s: &str, start: usize) -> usize {
    let b = s.as_bytes();
    let mut i = start;
    let digits = |i: &mut usize| {
        let from = *i;
        while *i < b.len() && b[*i].is_ascii_digit() {
            *i += 1;
        }
        *i > from
    };
    let int_part = digits(&mut i);
    let mut frac_part = false;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        frac_part = digits(&mut i);
    }
    if !int_part && !frac_part {
        return start;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if digits(&mut j) {
            i = j;
        }
    }
    i
}

/// Cursor over the tokens of one statement.
#[derive(Debug)]
pub(crate) struct Tokens<'t, 'a> {
    toks: &'t [Token<'a>],
    pos: usize,
    /// Position reported when the input runs out.
    end: (usize, usize),
}

impl<'t, 'a> Tokens<'t, 'a> {
    pub(crate) fn new(toks: &'t [Token<'a>], end: (usize, usize)) -> Self {
        Tokens { toks, pos: 0, end }
    }

    pub(crate) fn peek(&self) -> Option<&Token<'a>> {
        self.toks.get(self.pos)
    }

    pub(crate) fn next(&mut self) -> Option<Token<'a>> {
        let t = self.toks.get(self.pos).copied();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub(crate) fn position(&self) -> (usize, usize) {
        self.peek().map_or(self.end, |t| (t.line, t.column))
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> LexError {
        let (line, column) = self.position();
        LexError::new(line, column, message)
    }

    pub(crate) fn eat(&mut self, tok: Tok<'_>) -> bool {
        if self.peek().map(|t| t.tok) == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: Tok<'_>) -> Result<(), LexError> {
        if self.eat(tok) {
            return Ok(());
        }
        Err(self.unexpected(tok.describe()))
    }

    pub(crate) fn unexpected(&self, wanted: &str) -> LexError {
        match self.peek() {
            Some(t) => self.error(alloc::format!("expected {wanted}, found {}", t.tok.describe())),
            None => self.error(alloc::format!("expected {wanted}, found end of statement")),
        }
    }

    pub(crate) fn ident(&mut self) -> Result<&'a str, LexError> {
        match self.peek().map(|t| t.tok) {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    pub(crate) fn uint(&mut self) -> Result<u64, LexError> {
        match self.peek().map(|t| t.tok) {
            Some(Tok::Number(s)) if s.bytes().all(|b| b.is_ascii_digit()) => {
                let v = s
                    .parse::<u64>()
                    .map_err(|_| self.error("integer literal out of range"))?;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.unexpected("unsigned integer")),
        }
    }

    /// `name[index]`, returning both.
    pub(crate) fn indexed(&mut self) -> Result<(&'a str, u64), LexError> {
        let name = self.ident()?;
        self.expect(Tok::LBracket)?;
        let idx = self.uint()?;
        self.expect(Tok::RBracket)?;
        Ok((name, idx))
    }

    /// Constant angle expression over decimal literals and `pi` with
    /// `+ - * /`, unary minus and parentheses. The result must be finite.
    pub(crate) fn angle(&mut self) -> Result<f64, LexError> {
        let (line, column) = self.position();
        let v = self.sum(0)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(LexError::new(line, column, "angle is not a finite number"))
        }
    }

    fn sum(&mut self, depth: usize) -> Result<f64, LexError> {
        let mut acc = self.product(depth)?;
        loop {
            if self.eat(Tok::Plus) {
                acc += self.product(depth)?;
            } else if self.eat(Tok::Minus) {
                acc -= self.product(depth)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self, depth: usize) -> Result<f64, LexError> {
        let mut acc = self.unary(depth)?;
        loop {
            if self.eat(Tok::Star) {
                acc *= self.unary(depth)?;
            } else if self.eat(Tok::Slash) {
                acc /= self.unary(depth)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self, depth: usize) -> Result<f64, LexError> {
        // Bound recursion so hostile input cannot exhaust the stack.
        if depth > 64 {
            return Err(self.error("angle expression nested too deeply"));
        }
        if self.eat(Tok::Minus) {
            return Ok(-self.unary(depth + 1)?);
        }
        if self.eat(Tok::Plus) {
            return self.unary(depth + 1);
        }
        match self.peek().map(|t| t.tok) {
            Some(Tok::Number(s)) => {
                let v = s.parse::<f64>().map_err(|_| self.error("malformed number"))?;
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::Ident("pi")) => {
                self.pos += 1;
                Ok(PI)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let v = self.sum(depth + 1)?;
                self.expect(Tok::RParen)?;
                Ok(v)
            }
            _ => Err(self.unexpected("number")),
        }
    }
}
