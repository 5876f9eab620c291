//! Text formats: lattice expressions, rate expressions and model files.

mod expr;
mod lexer;
mod model;
mod rate;

pub use expr::{parse_expr, parse_expr_with, ExprOptions};
pub use model::{
    parse_distribution, parse_law, parse_model, parse_model_bytes, serialize_model, BoundsModel, Dependence,
    Structure, SystemModel,
};
pub use rate::RateExpr;
