//! System reliability from lattice polynomial life functions.
//!
//! A semicoherent system is described by a binary set function `v` on the
//! subsets of its `n` components, or equivalently by a min/max expression of
//! the component lifetimes. From that description the crate computes the
//! system reliability `R_S(t)` and mean time-to-failure under independent,
//! Bayes-dependent and pre-phase-dependent lifetimes, and under collective
//! lifetime bounds, with a Monte Carlo oracle for cross-checks.

pub mod analysis;
pub mod bounds;
pub mod dependence;
pub mod distribution;
pub mod dsl;
pub mod engine;
pub mod error;
pub mod format;
pub mod grid;
pub mod lattice;
pub mod montecarlo;
pub mod quadrature;

pub use analysis::Analysis;
pub use distribution::DistributionSpec;
pub use dsl::{parse_expr, parse_model, serialize_model, SystemModel};
pub use error::{Error, ParseError, Result};
pub use grid::TimeGrid;
pub use lattice::{LatticeExpr, MobiusVector, SetFunction, Subset};
pub use quadrature::{IntegralEstimate, QuadConfig};
