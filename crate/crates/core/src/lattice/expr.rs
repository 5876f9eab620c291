//! Lattice polynomial expressions over `[0, +∞]`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

use super::setfn::{check_units, SetFunction};
use super::subset::Subset;

#[derive(Debug, Clone, PartialEq)]
pub enum LatticeExpr {
    /// Component lifetime `x_i`, 1-based.
    Var(usize),
    /// Bound variable `q_j`, 1-based; only meaningful before [`LatticeExpr::resolve_bounds`].
    Bound(usize),
    /// Constant in `[0, +∞]` (weighted lattice polynomials only).
    Const(f64),
    Min(Vec<LatticeExpr>),
    Max(Vec<LatticeExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalForm {
    /// Max over minimal path sets of Min over members.
    Disjunctive,
    /// Min over minimal cut sets of Max over members.
    Conjunctive,
}

fn flatten_into(out: &mut Vec<LatticeExpr>, child: LatticeExpr, is_min: bool) {
    match child {
        LatticeExpr::Min(cs) if is_min => out.extend(cs),
        LatticeExpr::Max(cs) if !is_min => out.extend(cs),
        other => out.push(other),
    }
}

impl LatticeExpr {
    pub fn var(i: usize) -> Self {
        LatticeExpr::Var(i)
    }

    /// n-ary minimum; nested minima are flattened and a single child is returned as is.
    ///
    /// Panics on an empty child list.
    pub fn min(children: Vec<LatticeExpr>) -> Self {
        Self::nary(children, true)
    }

    /// n-ary maximum, flattened like [`LatticeExpr::min`].
    pub fn max(children: Vec<LatticeExpr>) -> Self {
        Self::nary(children, false)
    }

    fn nary(children: Vec<LatticeExpr>, is_min: bool) -> Self {
        assert!(!children.is_empty(), "min/max needs at least one operand");
        let mut flat = Vec::with_capacity(children.len());
        for c in children {
            flatten_into(&mut flat, c, is_min);
        }
        if flat.len() == 1 {
            return flat.pop().unwrap();
        }
        if is_min {
            LatticeExpr::Min(flat)
        } else {
            LatticeExpr::Max(flat)
        }
    }

    pub fn min_over(members: Subset) -> Self {
        Self::min(members.members().map(LatticeExpr::Var).collect())
    }

    pub fn max_over(members: Subset) -> Self {
        Self::max(members.members().map(LatticeExpr::Var).collect())
    }

    pub fn has_constants(&self) -> bool {
        match self {
            LatticeExpr::Const(_) => true,
            LatticeExpr::Var(_) | LatticeExpr::Bound(_) => false,
            LatticeExpr::Min(cs) | LatticeExpr::Max(cs) => cs.iter().any(Self::has_constants),
        }
    }

    pub fn has_bounds(&self) -> bool {
        match self {
            LatticeExpr::Bound(_) => true,
            LatticeExpr::Var(_) | LatticeExpr::Const(_) => false,
            LatticeExpr::Min(cs) | LatticeExpr::Max(cs) => cs.iter().any(Self::has_bounds),
        }
    }

    /// Largest `x` index referenced, 0 if none.
    pub fn max_var(&self) -> usize {
        match self {
            LatticeExpr::Var(i) => *i,
            LatticeExpr::Bound(_) | LatticeExpr::Const(_) => 0,
            LatticeExpr::Min(cs) | LatticeExpr::Max(cs) => {
                cs.iter().map(Self::max_var).max().unwrap_or(0)
            }
        }
    }

    /// Largest `q` index referenced, 0 if none.
    pub fn max_bound(&self) -> usize {
        match self {
            LatticeExpr::Bound(j) => *j,
            LatticeExpr::Var(_) | LatticeExpr::Const(_) => 0,
            LatticeExpr::Min(cs) | LatticeExpr::Max(cs) => {
                cs.iter().map(Self::max_bound).max().unwrap_or(0)
            }
        }
    }

    /// Set of `x` indices referenced (indices must be ≤ 32).
    pub fn variables(&self) -> Subset {
        match self {
            LatticeExpr::Var(i) => Subset::singleton(*i),
            LatticeExpr::Bound(_) | LatticeExpr::Const(_) => Subset::EMPTY,
            LatticeExpr::Min(cs) | LatticeExpr::Max(cs) => cs
                .iter()
                .fold(Subset::EMPTY, |acc, c| acc.union(c.variables())),
        }
    }

    /// Checks the structural invariants against an index space of `n` variables.
    pub fn validate(&self, n: usize) -> Result<()> {
        self.validate_nodes(n)?;
        if self.max_var() == 0 {
            return Err(Error::Structure("expression references no variable".into()));
        }
        Ok(())
    }

    fn validate_nodes(&self, n: usize) -> Result<()> {
        match self {
            LatticeExpr::Var(i) if *i == 0 || *i > n => Err(Error::Structure(format!(
                "variable x{i} outside 1..={n}"
            ))),
            LatticeExpr::Var(_) => Ok(()),
            LatticeExpr::Bound(j) => Err(Error::Structure(format!(
                "bound variable q{j} is only allowed inside bound definitions"
            ))),
            LatticeExpr::Const(c) if c.is_nan() || *c < 0.0 => {
                Err(Error::Structure(format!("constant {c} outside [0, inf]")))
            }
            LatticeExpr::Const(_) => Ok(()),
            LatticeExpr::Min(cs) | LatticeExpr::Max(cs) => {
                if cs.len() < 2 {
                    return Err(Error::Structure("min/max needs at least two operands".into()));
                }
                cs.iter().try_for_each(|c| c.validate_nodes(n))
            }
        }
    }

    /// Evaluates the lattice polynomial at `t` (entry `i - 1` is `x_i`).
    pub fn eval(&self, t: &[f64]) -> Result<f64> {
        match self {
            LatticeExpr::Var(i) => t
                .get(i.wrapping_sub(1))
                .copied()
                .ok_or_else(|| Error::Structure(format!("variable x{i} outside 1..={}", t.len()))),
            LatticeExpr::Bound(j) => Err(Error::Structure(format!(
                "unresolved bound variable q{j}"
            ))),
            LatticeExpr::Const(c) => Ok(*c),
            LatticeExpr::Min(cs) => cs
                .iter()
                .try_fold(f64::INFINITY, |acc, c| Ok(acc.min(c.eval(t)?))),
            LatticeExpr::Max(cs) => cs
                .iter()
                .try_fold(0.0f64, |acc, c| Ok(acc.max(c.eval(t)?))),
        }
    }

    /// Replaces every bound `q_j` by `x_{offset + j}`.
    pub fn resolve_bounds(&self, offset: usize) -> LatticeExpr {
        self.map_leaves(&mut |leaf| match leaf {
            LatticeExpr::Bound(j) => LatticeExpr::Var(offset + j),
            other => other.clone(),
        })
    }

    /// Replaces every bound `q_j` by the constant `values[j - 1]`.
    pub fn pin_bounds(&self, values: &[f64]) -> Result<LatticeExpr> {
        if self.max_bound() > values.len() {
            return Err(Error::Structure(format!("no value for bound q{}", self.max_bound())));
        }
        Ok(self.map_leaves(&mut |leaf| match leaf {
            LatticeExpr::Bound(j) => LatticeExpr::Const(values[j - 1]),
            other => other.clone(),
        }))
    }

    fn map_leaves(&self, f: &mut impl FnMut(&LatticeExpr) -> LatticeExpr) -> LatticeExpr {
        match self {
            LatticeExpr::Min(cs) => LatticeExpr::min(cs.iter().map(|c| c.map_leaves(f)).collect()),
            LatticeExpr::Max(cs) => LatticeExpr::max(cs.iter().map(|c| c.map_leaves(f)).collect()),
            leaf => f(leaf),
        }
    }

    /// Composition: every `x_i` with a binding is replaced by that expression.
    ///
    /// In strict mode a variable without a binding is an error; otherwise it is kept.
    pub fn substitute(&self, bindings: &BTreeMap<usize, LatticeExpr>, strict: bool) -> Result<LatticeExpr> {
        match self {
            LatticeExpr::Var(i) => match bindings.get(i) {
                Some(e) => Ok(e.clone()),
                None if strict => Err(Error::UnboundVariable(*i)),
                None => Ok(self.clone()),
            },
            LatticeExpr::Bound(_) | LatticeExpr::Const(_) => Ok(self.clone()),
            LatticeExpr::Min(cs) => Ok(LatticeExpr::min(
                cs.iter()
                    .map(|c| c.substitute(bindings, strict))
                    .collect::<Result<_>>()?,
            )),
            LatticeExpr::Max(cs) => Ok(LatticeExpr::max(
                cs.iter()
                    .map(|c| c.substitute(bindings, strict))
                    .collect::<Result<_>>()?,
            )),
        }
    }

    /// Evaluates the expression on every characteristic vector of `{0, +∞}^n` at once.
    ///
    /// On that domain `min`/`max` act as AND/OR, so each node is a bit column of
    /// length `2^n` where bit `A` records whether the node equals `+∞` at `e_A`.
    fn truth_columns(&self, n: usize) -> Vec<u64> {
        let size = 1usize << n;
        let words = size.div_ceil(64);
        let tail_mask = if size % 64 == 0 { u64::MAX } else { (1u64 << size) - 1 };
        match self {
            LatticeExpr::Var(i) => {
                let bit = i - 1;
                let mut col = vec![0u64; words];
                if bit < 6 {
                    // pattern repeats inside one word
                    let mut pat = 0u64;
                    for k in 0..64 {
                        if (k >> bit) & 1 == 1 {
                            pat |= 1 << k;
                        }
                    }
                    col.iter_mut().for_each(|w| *w = pat);
                } else {
                    let period = 1usize << (bit - 6);
                    for (w, word) in col.iter_mut().enumerate() {
                        if (w / period) & 1 == 1 {
                            *word = u64::MAX;
                        }
                    }
                }
                if let Some(last) = col.last_mut() {
                    *last &= tail_mask;
                }
                col
            }
            LatticeExpr::Min(cs) => {
                let mut acc = cs[0].truth_columns(n);
                for c in &cs[1..] {
                    for (a, b) in acc.iter_mut().zip(c.truth_columns(n)) {
                        *a &= b;
                    }
                }
                acc
            }
            LatticeExpr::Max(cs) => {
                let mut acc = cs[0].truth_columns(n);
                for c in &cs[1..] {
                    for (a, b) in acc.iter_mut().zip(c.truth_columns(n)) {
                        *a |= b;
                    }
                }
                acc
            }
            LatticeExpr::Bound(_) | LatticeExpr::Const(_) => {
                unreachable!("checked by to_set_function")
            }
        }
    }

    /// The unique nondecreasing set function `v` with `v(A) = 1` iff the
    /// expression is `+∞` at the characteristic vector `e_A^{0,∞}`.
    pub fn to_set_function(&self, n: usize) -> Result<SetFunction> {
        check_units(n)?;
        if self.has_constants() {
            return Err(Error::ConstantInBinary);
        }
        self.validate(n)?;
        let cols = self.truth_columns(n);
        SetFunction::from_fn(n, |a| cols[a.index() / 64] >> (a.index() % 64) & 1 == 1)
    }

    /// Minimal-term normal form of a semicoherent set function.
    pub fn from_set_function(v: &SetFunction, form: NormalForm) -> Result<LatticeExpr> {
        let pc = v.minimal_paths_cuts()?;
        Ok(match form {
            NormalForm::Disjunctive => {
                LatticeExpr::max(pc.paths.iter().map(|&p| LatticeExpr::min_over(p)).collect())
            }
            NormalForm::Conjunctive => {
                LatticeExpr::min(pc.cuts.iter().map(|&k| LatticeExpr::max_over(k)).collect())
            }
        })
    }
}

pub fn eval_expr(expr: &LatticeExpr, t: &[f64]) -> Result<f64> {
    expr.eval(t)
}

pub fn expr_to_setfunction(expr: &LatticeExpr, n: usize) -> Result<SetFunction> {
    expr.to_set_function(n)
}

pub fn setfunction_to_expr(v: &SetFunction, form: NormalForm) -> Result<LatticeExpr> {
    LatticeExpr::from_set_function(v, form)
}

pub fn substitute(
    expr: &LatticeExpr,
    bindings: &BTreeMap<usize, LatticeExpr>,
    strict: bool,
) -> Result<LatticeExpr> {
    expr.substitute(bindings, strict)
}

fn fmt_number(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c.is_infinite() {
        f.write_str("inf")
    } else {
        write!(f, "{c}")
    }
}

impl fmt::Display for LatticeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, name: &str, cs: &[LatticeExpr]| {
            write!(f, "{name}(")?;
            for (k, c) in cs.iter().enumerate() {
                if k > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")
        };
        match self {
            LatticeExpr::Var(i) => write!(f, "x{i}"),
            LatticeExpr::Bound(j) => write!(f, "q{j}"),
            LatticeExpr::Const(c) => fmt_number(f, *c),
            LatticeExpr::Min(cs) => list(f, "min", cs),
            LatticeExpr::Max(cs) => list(f, "max", cs),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> LatticeExpr {
        LatticeExpr::Var(i)
    }

    fn s(m: &[usize]) -> Subset {
        Subset::from_members(m.iter().copied())
    }

    #[test]
    fn eval_examples() {
        assert_eq!(x(1).eval(&[7.0]).unwrap(), 7.0);
        let e = LatticeExpr::min(vec![x(1), LatticeExpr::max(vec![x(2), x(3)])]);
        assert_eq!(e.eval(&[5.0, 2.0, 3.0]).unwrap(), 3.0);
        assert_eq!(e.eval(&[1.0, f64::INFINITY, 0.0]).unwrap(), 1.0);
        assert!(matches!(e.eval(&[1.0, 2.0]), Err(Error::Structure(_))));
    }

    #[test]
    fn construction_flattens() {
        let e = LatticeExpr::min(vec![LatticeExpr::min(vec![x(1), x(2)]), x(3)]);
        assert_eq!(e, LatticeExpr::Min(vec![x(1), x(2), x(3)]));
        let e = LatticeExpr::max(vec![x(1), LatticeExpr::min(vec![x(2), x(3)])]);
        assert!(matches!(&e, LatticeExpr::Max(cs) if cs.len() == 2));
        assert_eq!(LatticeExpr::min(vec![x(4)]), x(4));
    }

    /// Set function by literal evaluation on `e_A^{0,∞}`.
    fn by_evaluation(e: &LatticeExpr, n: usize) -> SetFunction {
        SetFunction::from_fn(n, |a| {
            let t: Vec<f64> = (1..=n)
                .map(|i| if a.contains(i) { f64::INFINITY } else { 0.0 })
                .collect();
            e.eval(&t).unwrap() == f64::INFINITY
        })
        .unwrap()
    }

    #[test]
    fn set_function_examples() {
        let series = LatticeExpr::min(vec![x(1), x(2)]).to_set_function(2).unwrap();
        assert_eq!(series, SetFunction::series(2).unwrap());
        let parallel = LatticeExpr::max(vec![x(1), x(2)]).to_set_function(2).unwrap();
        assert_eq!(parallel, SetFunction::parallel(2).unwrap());
        let e = LatticeExpr::min(vec![x(1), LatticeExpr::max(vec![x(2), x(3)])]);
        let v = e.to_set_function(3).unwrap();
        for a in Subset::full(3).subsets() {
            assert_eq!(v.value(a), a.contains(1) && a.intersects(s(&[2, 3])));
        }
    }

    #[test]
    fn bit_columns_match_literal_evaluation() {
        // exercises the multi-word column path (n > 6)
        let e = LatticeExpr::max(vec![
            LatticeExpr::min(vec![x(1), x(8)]),
            LatticeExpr::min(vec![x(7), LatticeExpr::max(vec![x(2), x(9)])]),
            LatticeExpr::min(vec![x(3), x(4), x(5), x(6)]),
        ]);
        assert_eq!(e.to_set_function(9).unwrap(), by_evaluation(&e, 9));
        let e = LatticeExpr::min(vec![x(1), x(3)]);
        assert_eq!(e.to_set_function(3).unwrap(), by_evaluation(&e, 3));
    }

    #[test]
    fn constants_are_not_binary() {
        let e = LatticeExpr::min(vec![x(1), LatticeExpr::Const(5.0)]);
        assert!(matches!(e.to_set_function(1), Err(Error::ConstantInBinary)));
        assert_eq!(e.eval(&[3.0]).unwrap(), 3.0);
        assert_eq!(e.eval(&[9.0]).unwrap(), 5.0);
        let e = LatticeExpr::max(vec![x(1), LatticeExpr::Const(2.0)]);
        assert_eq!(e.eval(&[1.0]).unwrap(), 2.0);
    }

    #[test]
    fn normal_forms() {
        let v = SetFunction::series(2).unwrap();
        assert_eq!(
            LatticeExpr::from_set_function(&v, NormalForm::Disjunctive).unwrap(),
            LatticeExpr::Min(vec![x(1), x(2)])
        );
        let v = SetFunction::k_out_of_n(2, 3).unwrap();
        let d = LatticeExpr::from_set_function(&v, NormalForm::Disjunctive).unwrap();
        assert_eq!(d.to_string(), "max(min(x1, x2), min(x1, x3), min(x2, x3))");
        let c = LatticeExpr::from_set_function(&v, NormalForm::Conjunctive).unwrap();
        assert_eq!(c.to_string(), "min(max(x1, x2), max(x1, x3), max(x2, x3))");
        assert_eq!(c.to_set_function(3).unwrap(), v);
        let bad = SetFunction::new(1, vec![true, true]).unwrap();
        assert!(LatticeExpr::from_set_function(&bad, NormalForm::Disjunctive).is_err());
    }

    #[test]
    fn substitution_examples() {
        let mut b = BTreeMap::new();
        b.insert(1, LatticeExpr::min(vec![x(1), x(2)]));
        assert_eq!(x(1).substitute(&b, true).unwrap(), LatticeExpr::Min(vec![x(1), x(2)]));

        let mut b = BTreeMap::new();
        b.insert(1, LatticeExpr::min(vec![x(1), x(3)]));
        b.insert(2, LatticeExpr::min(vec![x(2), x(3)]));
        let e = LatticeExpr::min(vec![x(1), x(2)]).substitute(&b, true).unwrap();
        let want = LatticeExpr::min(vec![x(1), x(2), x(3)]);
        assert_eq!(e.to_set_function(3).unwrap(), want.to_set_function(3).unwrap());

        let mut b = BTreeMap::new();
        b.insert(1, x(1));
        assert!(matches!(
            LatticeExpr::min(vec![x(1), x(2)]).substitute(&b, true),
            Err(Error::UnboundVariable(2))
        ));
        assert!(LatticeExpr::min(vec![x(1), x(2)]).substitute(&b, false).is_ok());
    }

    #[test]
    fn validation() {
        assert!(x(3).validate(2).is_err());
        assert!(x(0).validate(2).is_err());
        assert!(LatticeExpr::Min(vec![x(1)]).validate(2).is_err());
        assert!(LatticeExpr::Const(1.0).validate(2).is_err());
        assert!(LatticeExpr::Bound(1).validate(2).is_err());
        assert!(LatticeExpr::max(vec![x(1), LatticeExpr::Const(f64::INFINITY)]).validate(1).is_ok());
    }
}
