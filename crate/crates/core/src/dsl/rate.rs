//! Arithmetic expressions in the factor values `u1..um` (`u` is `u1`).
//!
//! ```text
//! sum   := term (("+" | "-") term)*
//! term  := unary (("*" | "/") unary)*
//! unary := "-" unary | power
//! power := atom ("^" unary)?
//! atom  := number | "u" | "u<k>" | ("exp" | "log") "(" sum ")" | "(" sum ")"
//! ```

use std::fmt;

use crate::error::ParseError;

use super::lexer::{indexed, Cursor, Tok};

#[derive(Debug, Clone, PartialEq)]
pub enum RateExpr {
    Num(f64),
    /// Factor value `u_k`, 1-based.
    Factor(usize),
    Neg(Box<RateExpr>),
    Add(Box<RateExpr>, Box<RateExpr>),
    Sub(Box<RateExpr>, Box<RateExpr>),
    Mul(Box<RateExpr>, Box<RateExpr>),
    Div(Box<RateExpr>, Box<RateExpr>),
    Pow(Box<RateExpr>, Box<RateExpr>),
    Exp(Box<RateExpr>),
    Log(Box<RateExpr>),
}

impl RateExpr {
    pub fn constant(x: f64) -> Self {
        RateExpr::Num(x)
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut cur = Cursor::new(text)?;
        let e = parse_sum(&mut cur)?;
        cur.expect_end()?;
        Ok(e)
    }

    /// Evaluates at factor values `u` (entry `k - 1` is `u_k`); missing factors read as NaN.
    pub fn eval(&self, u: &[f64]) -> f64 {
        match self {
            RateExpr::Num(x) => *x,
            RateExpr::Factor(k) => u.get(k - 1).copied().unwrap_or(f64::NAN),
            RateExpr::Neg(a) => -a.eval(u),
            RateExpr::Add(a, b) => a.eval(u) + b.eval(u),
            RateExpr::Sub(a, b) => a.eval(u) - b.eval(u),
            RateExpr::Mul(a, b) => a.eval(u) * b.eval(u),
            RateExpr::Div(a, b) => a.eval(u) / b.eval(u),
            RateExpr::Pow(a, b) => a.eval(u).powf(b.eval(u)),
            RateExpr::Exp(a) => a.eval(u).exp(),
            RateExpr::Log(a) => a.eval(u).ln(),
        }
    }

    /// Largest factor index referenced, 0 for a constant expression.
    pub fn max_factor(&self) -> usize {
        match self {
            RateExpr::Num(_) => 0,
            RateExpr::Factor(k) => *k,
            RateExpr::Neg(a) | RateExpr::Exp(a) | RateExpr::Log(a) => a.max_factor(),
            RateExpr::Add(a, b)
            | RateExpr::Sub(a, b)
            | RateExpr::Mul(a, b)
            | RateExpr::Div(a, b)
            | RateExpr::Pow(a, b) => a.max_factor().max(b.max_factor()),
        }
    }

    /// The value if the expression does not depend on any factor.
    pub fn as_constant(&self) -> Option<f64> {
        (self.max_factor() == 0).then(|| self.eval(&[]))
    }
}

pub(crate) fn parse_sum(cur: &mut Cursor) -> Result<RateExpr, ParseError> {
    cur.enter()?;
    let mut lhs = parse_term(cur)?;
    loop {
        match cur.peek() {
            Some(Tok::Plus) => {
                cur.next();
                lhs = RateExpr::Add(Box::new(lhs), Box::new(parse_term(cur)?));
            }
            Some(Tok::Minus) => {
                cur.next();
                lhs = RateExpr::Sub(Box::new(lhs), Box::new(parse_term(cur)?));
            }
            _ => break,
        }
    }
    cur.leave();
    Ok(lhs)
}

fn parse_term(cur: &mut Cursor) -> Result<RateExpr, ParseError> {
    let mut lhs = parse_unary(cur)?;
    loop {
        match cur.peek() {
            Some(Tok::Star) => {
                cur.next();
                lhs = RateExpr::Mul(Box::new(lhs), Box::new(parse_unary(cur)?));
            }
            Some(Tok::Slash) => {
                cur.next();
                lhs = RateExpr::Div(Box::new(lhs), Box::new(parse_unary(cur)?));
            }
            _ => break,
        }
    }
    Ok(lhs)
}

fn parse_unary(cur: &mut Cursor) -> Result<RateExpr, ParseError> {
    cur.enter()?;
    let e = if cur.peek() == Some(&Tok::Minus) {
        cur.next();
        RateExpr::Neg(Box::new(parse_unary(cur)?))
    } else {
        let base = parse_atom(cur)?;
        if cur.peek() == Some(&Tok::Caret) {
            cur.next();
            RateExpr::Pow(Box::new(base), Box::new(parse_unary(cur)?))
        } else {
            base
        }
    };
    cur.leave();
    Ok(e)
}

fn parse_atom(cur: &mut Cursor) -> Result<RateExpr, ParseError> {
    let offset = cur.offset();
    match cur.next().map(|t| t.tok) {
        Some(Tok::Number(x)) => Ok(RateExpr::Num(x)),
        Some(Tok::LParen) => {
            let e = parse_sum(cur)?;
            cur.expect(Tok::RParen, "')'")?;
            Ok(e)
        }
        Some(Tok::Ident(name)) => match name.as_str() {
            "u" => Ok(RateExpr::Factor(1)),
            "exp" | "log" => {
                cur.expect(Tok::LParen, "'('")?;
                let arg = Box::new(parse_sum(cur)?);
                cur.expect(Tok::RParen, "')'")?;
                Ok(if name == "exp" { RateExpr::Exp(arg) } else { RateExpr::Log(arg) })
            }
            other => indexed(other, "u")
                .map(RateExpr::Factor)
                .ok_or_else(|| ParseError::new(offset, format!("unknown identifier '{other}' in rate expression"))),
        },
        None => Err(ParseError::new(offset, "unexpected end of input, expected a rate expression")),
        Some(_) => Err(ParseError::new(offset, "expected a number, u, exp(...), log(...) or '('")),
    }
}

impl fmt::Display for RateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateExpr::Num(x) => write!(f, "{x}"),
            RateExpr::Factor(1) => f.write_str("u"),
            RateExpr::Factor(k) => write!(f, "u{k}"),
            RateExpr::Neg(a) => write!(f, "-{a}"),
            RateExpr::Add(a, b) => write!(f, "({a} + {b})"),
            RateExpr::Sub(a, b) => write!(f, "({a} - {b})"),
            RateExpr::Mul(a, b) => write!(f, "({a} * {b})"),
            RateExpr::Div(a, b) => write!(f, "({a} / {b})"),
            RateExpr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            RateExpr::Exp(a) => write!(f, "exp({a})"),
            RateExpr::Log(a) => write!(f, "log({a})"),
        }
    }
}
