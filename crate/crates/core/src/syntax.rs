//! Tokenizer and feature-expression parser shared by the specification
//! language and the command line.
//!
//! Expression precedence, tightest first: `!`, `&&`, `xor`, `||`, `->`,
//! `<->`. `->` associates to the right, the others to the left.

use std::fmt;

use thiserror::Error;

use crate::logic::FeatureExpr;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        SyntaxError { pos, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// Identifiers, keywords and numbers: `[A-Za-z0-9_]+`.
    Word(String),
    Semi,
    Comma,
    Colon,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Star,
    Eq,
    Bang,
    Question,
    Arrow,
    DoubleArrow,
    AndAnd,
    OrOr,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Question => f.write_str("`?`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::DoubleArrow => f.write_str("`<->`"),
            Tok::AndAnd => f.write_str("`&&`"),
            Tok::OrOr => f.write_str("`||`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits `text` into tokens. `#` starts a comment running to end of line.
pub fn tokenize(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if is_word_char(c) {
            let start = i;
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Word(chars[start..i].iter().collect()), pos });
            continue;
        }
        let rest = |s: &str| chars[i..].iter().take(s.len()).copied().eq(s.chars());
        let (tok, len) = if rest("<->") {
            (Tok::DoubleArrow, 3)
        } else if rest("->") {
            (Tok::Arrow, 2)
        } else if rest("&&") {
            (Tok::AndAnd, 2)
        } else if rest("||") {
            (Tok::OrOr, 2)
        } else {
            let t = match c {
                ';' => Tok::Semi,
                ',' => Tok::Comma,
                ':' => Tok::Colon,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '*' => Tok::Star,
                '=' => Tok::Eq,
                '!' => Tok::Bang,
                '?' => Tok::Question,
                other => return Err(SyntaxError::new(pos, format!("unexpected character `{other}`"))),
            };
            (t, 1)
        };
        i += len;
        col += len;
        out.push(Token { tok, pos });
    }
    out.push(Token { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}

/// Cursor over a token stream.
pub struct Tokens {
    toks: Vec<Token>,
    at: usize,
}

impl Tokens {
    pub fn new(toks: Vec<Token>) -> Self {
        assert!(matches!(toks.last(), Some(Token { tok: Tok::Eof, .. })));
        Tokens { toks, at: 0 }
    }

    pub fn peek(&self) -> &Token {
        &self.toks[self.at]
    }

    pub fn peek_at(&self, offset: usize) -> &Token {
        &self.toks[(self.at + offset).min(self.toks.len() - 1)]
    }

    pub fn pos(&self) -> Pos {
        self.peek().pos
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if t.tok != Tok::Eof {
            self.at += 1;
        }
        t
    }

    pub fn at_word(&self, w: &str) -> bool {
        matches!(&self.peek().tok, Tok::Word(x) if x == w)
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn eat_word(&mut self, w: &str) -> bool {
        if self.at_word(w) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: Tok) -> Result<Pos, SyntaxError> {
        let t = self.next();
        if t.tok == tok {
            Ok(t.pos)
        } else {
            Err(SyntaxError::new(t.pos, format!("expected {tok}, found {}", t.tok)))
        }
    }

    pub fn expect_word(&mut self, what: &str) -> Result<(String, Pos), SyntaxError> {
        let t = self.next();
        match t.tok {
            Tok::Word(w) => Ok((w, t.pos)),
            other => Err(SyntaxError::new(t.pos, format!("expected {what}, found {other}"))),
        }
    }

    /// Skips tokens up to and including the next `;` or up to a `}` at the
    /// current nesting level.
    pub fn recover(&mut self) {
        let mut depth = 0usize;
        loop {
            match self.peek().tok {
                Tok::Eof => return,
                Tok::Semi if depth == 0 => {
                    self.next();
                    return;
                }
                Tok::LBrace => depth += 1,
                Tok::RBrace if depth == 0 => return,
                Tok::RBrace => depth -= 1,
                _ => {}
            }
            self.next();
        }
    }

    pub fn parse_expr(&mut self) -> Result<FeatureExpr, SyntaxError> {
        self.parse_iff()
    }

    fn parse_iff(&mut self) -> Result<FeatureExpr, SyntaxError> {
        let mut lhs = self.parse_implies()?;
        while self.eat(&Tok::DoubleArrow) {
            let rhs = self.parse_implies()?;
            lhs = FeatureExpr::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_implies(&mut self) -> Result<FeatureExpr, SyntaxError> {
        let lhs = self.parse_or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.parse_implies()?;
            return Ok(FeatureExpr::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn parse_or(&mut self) -> Result<FeatureExpr, SyntaxError> {
        let first = self.parse_xor()?;
        let mut parts = vec![first];
        while self.eat(&Tok::OrOr) {
            parts.push(self.parse_xor()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { FeatureExpr::Or(parts) })
    }

    fn parse_xor(&mut self) -> Result<FeatureExpr, SyntaxError> {
        let mut lhs = self.parse_and()?;
        while self.eat_word("xor") {
            let rhs = self.parse_and()?;
            lhs = FeatureExpr::xor(lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<FeatureExpr, SyntaxError> {
        let first = self.parse_unary()?;
        let mut parts = vec![first];
        while self.eat(&Tok::AndAnd) {
            parts.push(self.parse_unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { FeatureExpr::And(parts) })
    }

    fn parse_unary(&mut self) -> Result<FeatureExpr, SyntaxError> {
        if self.eat(&Tok::Bang) {
            return Ok(self.parse_unary()?.negate());
        }
        if self.eat(&Tok::LParen) {
            let e = self.parse_expr()?;
            self.expect(Tok::RParen)?;
            return Ok(e);
        }
        let t = self.next();
        match t.tok {
            Tok::Word(w) if w == "true" => Ok(FeatureExpr::True),
            Tok::Word(w) if w == "false" => Ok(FeatureExpr::False),
            Tok::Word(w) if w == "xor" => Err(SyntaxError::new(t.pos, "expected feature expression, found `xor`")),
            Tok::Word(w) => Ok(FeatureExpr::var(&w)),
            other => Err(SyntaxError::new(t.pos, format!("expected feature expression, found {other}"))),
        }
    }
}

/// Parses a standalone feature expression.
pub fn parse_expr(text: &str) -> Result<FeatureExpr, SyntaxError> {
    let mut toks = Tokens::new(tokenize(text)?);
    let e = toks.parse_expr()?;
    let t = toks.peek();
    if t.tok != Tok::Eof {
        return Err(SyntaxError::new(t.pos, format!("unexpected {} after expression", t.tok)));
    }
    Ok(e)
}
