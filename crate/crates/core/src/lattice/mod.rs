//! Set functions, Möbius transforms and lattice polynomial expressions.

mod expr;
mod mobius;
mod setfn;
mod structure;
mod subset;

pub use expr::{eval_expr, expr_to_setfunction, setfunction_to_expr, substitute, LatticeExpr, NormalForm};
pub use mobius::{inverse_subset_sums, mobius, subset_sums, symmetric_mobius, zeta, MobiusVector};
pub use setfn::{PathCutSets, SetFunction};
pub use structure::{structure_eval, StructureForm, StructureForms};
pub use subset::{Subset, MAX_UNITS};
