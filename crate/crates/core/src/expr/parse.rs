//! Expression grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('+' | '-') unary | power
//! power   := primary ('^' unary)?          right associative
//! primary := integer | identifier | 'exp' '(' expr ')' | '(' expr ')'
//! ```
//!
//! Identifiers must be declared in the [`VariableSet`]; `i` is the imaginary
//! unit. Exponents must evaluate to integer constants.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use super::{Expr, ExprError, Poly, RatFunc, Result, VariableSet};

const MAX_EXPONENT: i64 = 1000;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
    Open,
    Close,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next()?;
            let end = tok == Tok::End;
            out.push((tok, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize)> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let tok = match c {
            b'0'..=b'9' => {
                while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let digits = &self.src[start..self.pos];
                Tok::Int(digits.parse().expect("ascii digits"))
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                while self.pos < bytes.len() && bytes[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                Tok::Ident(self.src[start..self.pos].to_string())
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Tok::Op(c as char)
            }
            b'(' => {
                self.pos += 1;
                Tok::Open
            }
            b')' => {
                self.pos += 1;
                Tok::Close
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                return Err(ExprError::Syntax {
                    pos: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        Ok((tok, start))
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    vars: &'a VariableSet,
}

/// Parses `text` against `vars` and returns the canonical expression.
pub fn parse(text: &str, vars: &VariableSet) -> Result<Expr> {
    let mut p = Parser {
        toks: Lexer::tokens(text)?,
        at: 0,
        vars,
    };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        other => Err(p.error(format!("unexpected {}", describe(other)))),
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(n) => format!("integer `{n}`"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Op(c) => format!("operator `{c}`"),
        Tok::Open => "`(`".into(),
        Tok::Close => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn error(&self, message: String) -> ExprError {
        ExprError::Syntax {
            pos: self.pos(),
            message,
        }
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!(
                "expected {}, found {}",
                describe(&want),
                describe(self.peek())
            )))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    lhs = &lhs + &self.term()?;
                }
                Tok::Op('-') => {
                    self.bump();
                    lhs = &lhs - &self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    lhs = &lhs * &self.unary()?;
                }
                Tok::Op('/') => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = lhs.checked_div(&rhs)?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(-&self.unary()?)
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let exp_pos = self.pos();
        let exponent = self.unary()?;
        let n = integer_value(&exponent).ok_or(ExprError::NonIntegerExponent)?;
        if n.abs() > MAX_EXPONENT {
            return Err(ExprError::Syntax {
                pos: exp_pos,
                message: format!("exponent {n} exceeds the supported range"),
            });
        }
        base.pow(n)
    }

    fn primary(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) => Ok(Expr::real(RatFunc::from_poly(Poly::constant(n)))),
            Tok::Ident(name) => match name.as_str() {
                "i" => Ok(Expr::imaginary_unit()),
                "exp" => {
                    self.expect(Tok::Open)?;
                    let arg = self.expr()?;
                    self.expect(Tok::Close)?;
                    Ok(Expr::exp(arg))
                }
                _ => self
                    .vars
                    .get(&name)
                    .map(Expr::var)
                    .ok_or(ExprError::UnknownIdentifier { name, pos }),
            },
            Tok::Open => {
                let e = self.expr()?;
                self.expect(Tok::Close)?;
                Ok(e)
            }
            other => Err(ExprError::Syntax {
                pos,
                message: format!("unexpected {}", describe(&other)),
            }),
        }
    }
}

fn integer_value(e: &Expr) -> Option<i64> {
    let (n, d) = e.as_constant()?;
    if d.is_one() {
        n.to_i64()
    } else {
        None
    }
}
