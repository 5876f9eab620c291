//! Text form of lattice polynomial expressions.
//!
//! ```text
//! expr := "x<k>" | "q<k>" | number | "inf"
//!       | ("min" | "max") "(" expr ("," expr)+ ")"
//! ```
//!
//! Bound variables `q<k>` and constants are accepted only when enabled.

use crate::error::ParseError;
use crate::lattice::LatticeExpr;

use super::lexer::{indexed, Cursor, Tok};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExprOptions {
    pub allow_bounds: bool,
    pub allow_constants: bool,
}

impl ExprOptions {
    pub const PLAIN: ExprOptions = ExprOptions {
        allow_bounds: false,
        allow_constants: false,
    };
    pub const WEIGHTED: ExprOptions = ExprOptions {
        allow_bounds: false,
        allow_constants: true,
    };
    pub const BOUNDS: ExprOptions = ExprOptions {
        allow_bounds: true,
        allow_constants: false,
    };
}

/// Parses a plain lattice polynomial (variables, `min`, `max`).
pub fn parse_expr(text: &str) -> Result<LatticeExpr, ParseError> {
    parse_expr_with(text, ExprOptions::PLAIN)
}

pub fn parse_expr_with(text: &str, opts: ExprOptions) -> Result<LatticeExpr, ParseError> {
    let mut cur = Cursor::new(text)?;
    let e = parse_node(&mut cur, opts)?;
    cur.expect_end()?;
    if e.max_var() == 0 {
        return Err(ParseError::new(0, "expression references no component variable"));
    }
    Ok(e)
}

fn parse_node(cur: &mut Cursor, opts: ExprOptions) -> Result<LatticeExpr, ParseError> {
    let offset = cur.offset();
    match cur.next().map(|t| t.tok) {
        Some(Tok::Ident(name)) => match name.as_str() {
            "min" | "max" => {
                cur.enter()?;
                cur.expect(Tok::LParen, "'('")?;
                let mut children = vec![parse_node(cur, opts)?];
                while cur.peek() == Some(&Tok::Comma) {
                    cur.next();
                    children.push(parse_node(cur, opts)?);
                }
                cur.expect(Tok::RParen, "',' or ')'")?;
                cur.leave();
                if children.len() < 2 {
                    return Err(ParseError::new(offset, format!("{name} needs at least two operands")));
                }
                Ok(if name == "min" {
                    LatticeExpr::min(children)
                } else {
                    LatticeExpr::max(children)
                })
            }
            "inf" if opts.allow_constants => Ok(LatticeExpr::Const(f64::INFINITY)),
            other => {
                if let Some(i) = indexed(other, "x") {
                    if i > crate::lattice::MAX_UNITS {
                        return Err(ParseError::new(offset, format!("variable index {i} too large")));
                    }
                    Ok(LatticeExpr::Var(i))
                } else if let Some(j) = indexed(other, "q") {
                    if !opts.allow_bounds {
                        return Err(ParseError::new(
                            offset,
                            format!("bound variable '{other}' is only allowed inside bound definitions"),
                        ));
                    }
                    if j > crate::lattice::MAX_UNITS {
                        return Err(ParseError::new(offset, format!("bound index {j} too large")));
                    }
                    Ok(LatticeExpr::Bound(j))
                } else {
                    Err(ParseError::new(offset, format!("unknown identifier '{other}'")))
                }
            }
        },
        Some(Tok::Number(c)) if opts.allow_constants => Ok(LatticeExpr::Const(c)),
        Some(Tok::Number(_)) => Err(ParseError::new(
            offset,
            "constants are only allowed in weighted expressions",
        )),
        None => Err(ParseError::new(offset, "unexpected end of input")),
        Some(_) => Err(ParseError::new(offset, "expected a variable, min(...) or max(...)")),
    }
}
