//! Textual expressions for elements of K_n: integer literals, t for the
//! uniformizer zeta - 1, and w for the generator of the unramified part
//! (admissible only when d > 1), combined with +, -, *, ^ and parentheses.
//!
//! Grammar:
//!   expr   := term (('+' | '-') term)*
//!   term   := factor ('*' factor)*
//!   factor := atom ('^' uint)?
//!   atom   := int | 't' | 'w' | '(' expr ')'

use std::fmt;

use hilsym_core::{KnCtx, KnElem};

/// A syntax or admissibility error, with the byte position it occurred at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at position {}: {}", self.pos, self.msg)
    }
}

impl std::error::Error for ParseError {}

/// Parse and evaluate an element expression in the given layer.
pub fn parse_element(src: &str, kn: &KnCtx) -> Result<KnElem, ParseError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        kn,
    };
    let v = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(v)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    kn: &'a KnCtx,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ParseError {
        ParseError {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    /// Next significant byte, with the cursor parked on it.
    fn peek(&mut self) -> Option<u8> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<KnElem, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = self.kn.add(&acc, &t);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = self.kn.sub(&acc, &t);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<KnElem, ParseError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let f = self.factor()?;
            acc = self.kn.mul(&acc, &f);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<KnElem, ParseError> {
        let a = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let k = self.uint()?;
            return Ok(self.kn.pow(&a, k));
        }
        Ok(a)
    }

    fn atom(&mut self) -> Result<KnElem, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected a closing parenthesis"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(b't') => {
                self.pos += 1;
                Ok(self.kn.pie())
            }
            Some(b'w') => {
                if self.kn.coeff().degree() == 1 {
                    return Err(self.err("w is only admissible when d > 1"));
                }
                self.pos += 1;
                Ok(self.kn.from_coeff(&self.kn.coeff().gen()))
            }
            Some(c) if c.is_ascii_digit() => Ok(self.kn.from_u64(self.uint()?)),
            _ => Err(self.err("expected an integer, t, w, or a parenthesized expression")),
        }
    }

    fn uint(&mut self) -> Result<u64, ParseError> {
        if !self.peek().is_some_and(|c| c.is_ascii_digit()) {
            return Err(self.err("expected an unsigned integer"));
        }
        let start = self.pos;
        let mut v: u64 = 0;
        while let Some(&c) = self.src.get(self.pos) {
            if !c.is_ascii_digit() {
                break;
            }
            v = v
                .checked_mul(10)
                .and_then(|v| v.checked_add((c - b'0') as u64))
                .ok_or(ParseError {
                    pos: start,
                    msg: "integer literal too large".into(),
                })?;
            self.pos += 1;
        }
        Ok(v)
    }
}
