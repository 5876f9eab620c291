//! The six classical algebraic forms of a structure function.
//!
//! Each form is evaluated literally from its own defining sum or product, so
//! agreement between them is a real consistency check and not a tautology.
//! All forms accept real arguments in `[0,1]^n`, where they coincide with the
//! multilinear extension.

use std::fmt;
use std::str::FromStr;

use super::mobius::MobiusVector;
use super::setfn::SetFunction;
use super::subset::Subset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureForm {
    Primal,
    Dual,
    PrimalMobius,
    DualMobius,
    DisjunctiveNormal,
    ConjunctiveNormal,
}

impl StructureForm {
    pub const ALL: [StructureForm; 6] = [
        StructureForm::Primal,
        StructureForm::Dual,
        StructureForm::PrimalMobius,
        StructureForm::DualMobius,
        StructureForm::DisjunctiveNormal,
        StructureForm::ConjunctiveNormal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StructureForm::Primal => "primal",
            StructureForm::Dual => "dual",
            StructureForm::PrimalMobius => "primal-mobius",
            StructureForm::DualMobius => "dual-mobius",
            StructureForm::DisjunctiveNormal => "disjunctive",
            StructureForm::ConjunctiveNormal => "conjunctive",
        }
    }
}

impl fmt::Display for StructureForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StructureForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StructureForm::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown structure form '{s}'"))
    }
}

/// `v`, `v*` and both Möbius transforms, computed once.
#[derive(Debug, Clone)]
pub struct StructureForms {
    v: SetFunction,
    dual: SetFunction,
    m: MobiusVector,
    m_dual: MobiusVector,
}

fn prod_present(p: &[f64], a: Subset) -> f64 {
    a.members().map(|i| p[i - 1]).product()
}

fn prod_absent(p: &[f64], a: Subset) -> f64 {
    a.members().map(|i| 1.0 - p[i - 1]).product()
}

impl StructureForms {
    pub fn new(v: &SetFunction) -> Self {
        let dual = v.dual();
        Self {
            m: MobiusVector::of(v),
            m_dual: MobiusVector::of(&dual),
            v: v.clone(),
            dual,
        }
    }

    pub fn set_function(&self) -> &SetFunction {
        &self.v
    }

    pub fn dual(&self) -> &SetFunction {
        &self.dual
    }

    pub fn mobius(&self) -> &MobiusVector {
        &self.m
    }

    pub fn dual_mobius(&self) -> &MobiusVector {
        &self.m_dual
    }

    /// Evaluates one form at `p ∈ [0,1]^n`.
    pub fn eval(&self, p: &[f64], form: StructureForm) -> f64 {
        let n = self.v.n();
        assert_eq!(p.len(), n, "argument length must equal n");
        let full = Subset::full(n);
        match form {
            StructureForm::Primal => full
                .subsets()
                .filter(|&a| self.v.value(a))
                .map(|a| prod_present(p, a) * prod_absent(p, a.complement(n)))
                .sum(),
            StructureForm::Dual => {
                1.0 - full
                    .subsets()
                    .filter(|&a| self.dual.value(a))
                    .map(|a| prod_present(p, a.complement(n)) * prod_absent(p, a))
                    .sum::<f64>()
            }
            StructureForm::PrimalMobius => self
                .m
                .nonzero()
                .map(|(a, c)| c as f64 * prod_present(p, a))
                .sum(),
            StructureForm::DualMobius => self
                .m_dual
                .nonzero()
                .map(|(a, c)| c as f64 * (1.0 - prod_absent(p, a)))
                .sum(),
            StructureForm::DisjunctiveNormal => {
                1.0 - full
                    .subsets()
                    .filter(|&a| self.v.value(a))
                    .map(|a| 1.0 - prod_present(p, a))
                    .product::<f64>()
            }
            StructureForm::ConjunctiveNormal => full
                .subsets()
                .filter(|&a| self.dual.value(a))
                .map(|a| 1.0 - prod_absent(p, a))
                .product(),
        }
    }

    /// Binary evaluation; every form yields an exact 0 or 1 on binary input.
    pub fn eval_binary(&self, x: &[bool], form: StructureForm) -> bool {
        let p: Vec<f64> = x.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        let y = self.eval(&p, form);
        debug_assert!(y == 0.0 || y == 1.0, "{form} gave {y} on binary input");
        y > 0.5
    }
}

/// One-shot evaluation of `φ_v(x)` in the requested form.
pub fn structure_eval(v: &SetFunction, x: &[bool], form: StructureForm) -> bool {
    StructureForms::new(v).eval_binary(x, form)
}
