//! A small recursive-descent parser for arithmetic expressions with rational
//! scalars, shared by series literals and enveloping-algebra expressions.
//!
//! Grammar:
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' integer)?
//! atom   := number | ident | '(' expr ')'
//! ```
//! Division is only allowed by a nonzero scalar.

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::field::Q;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at position {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

/// Target algebra for the parser.
pub trait ExprAlgebra {
    type Elem: Clone;

    fn constant(&self, c: Q) -> Self::Elem;
    fn atom(&self, name: &str) -> Option<Self::Elem>;
    /// Whether `name` followed by `+`/`-` forms a single identifier (`u+`).
    fn signed_ident(&self, _name: &str) -> bool {
        false
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn scale(&self, a: &Self::Elem, s: &Q) -> Self::Elem;
    fn as_scalar(&self, a: &Self::Elem) -> Option<Q>;
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn lex<A: ExprAlgebra>(alg: &A, s: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push((start, Tok::Num(text.parse().expect("digits"))));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let mut name: String = chars[start..i].iter().collect();
            if i < chars.len() && (chars[i] == '+' || chars[i] == '-') && alg.signed_ident(&name) {
                name.push(chars[i]);
                i += 1;
            }
            out.push((start, Tok::Ident(name)));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(ParseError {
                pos: i,
                msg: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a, A: ExprAlgebra> {
    alg: &'a A,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl<A: ExprAlgebra> Parser<'_, A> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.here(),
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<A::Elem, ParseError> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' {
                self.alg.add(&acc, &rhs)
            } else {
                let neg = self.alg.scale(&rhs, &-Q::from_integer(1.into()));
                self.alg.add(&acc, &neg)
            };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<A::Elem, ParseError> {
        let mut acc = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let at = self.here();
            let rhs = self.unary()?;
            acc = if op == '*' {
                self.alg.mul(&acc, &rhs)
            } else {
                match self.alg.as_scalar(&rhs) {
                    Some(s) if !s.is_zero() => self.alg.scale(&acc, &s.recip()),
                    Some(_) => {
                        return Err(ParseError {
                            pos: at,
                            msg: "division by zero".into(),
                        })
                    }
                    None => {
                        return Err(ParseError {
                            pos: at,
                            msg: "can only divide by a scalar".into(),
                        })
                    }
                }
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<A::Elem, ParseError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(self.alg.scale(&inner, &-Q::from_integer(1.into())));
        }
        if let Some(Tok::Op('+')) = self.peek() {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<A::Elem, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let Some(Tok::Num(n)) = self.peek().cloned() else {
                return self.err("expected a non-negative integer exponent");
            };
            self.pos += 1;
            let e: u32 = match n.try_into() {
                Ok(e) => e,
                Err(_) => return self.err("exponent too large"),
            };
            let mut acc = self.alg.constant(Q::from_integer(1.into()));
            for _ in 0..e {
                acc = self.alg.mul(&acc, &base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<A::Elem, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(self.alg.constant(Q::from_integer(n)))
            }
            Some(Tok::Ident(name)) => match self.alg.atom(&name) {
                Some(e) => {
                    self.pos += 1;
                    Ok(e)
                }
                None => self.err(format!("unknown identifier '{name}'")),
            },
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::Op(')')) {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(Tok::Op(c)) => self.err(format!("unexpected '{c}'")),
            None => self.err("unexpected end of input"),
        }
    }
}

pub fn parse<A: ExprAlgebra>(alg: &A, s: &str) -> Result<A::Elem, ParseError> {
    let toks = lex(alg, s)?;
    let mut p = Parser {
        alg,
        toks,
        pos: 0,
        end: s.chars().count(),
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}
