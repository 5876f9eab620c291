//! Collective lifetime bounds.
//!
//! A bound `Q_j` caps (upper) or extends (lower) the lifetimes of the
//! components in its scope. Component `i` then lives
//! `q_i = min(max(T_i, lowers covering i), uppers covering i)`, and the
//! system is an ordinary lattice polynomial in `n + m` units with bound `j`
//! at index `n + j`. Intrinsic lifetimes are assumed independent of each
//! other and of the bounds.

use std::collections::BTreeMap;
use std::fmt;

use crate::distribution::DistributionSpec;
use crate::engine::{mttf_exponential_closed, try_mttf, IndependentOracle, JointSurvivalOracle};
use crate::error::{Error, Result};
use crate::lattice::{LatticeExpr, MobiusVector, SetFunction, Subset, MAX_UNITS};
use crate::quadrature::{IntegralEstimate, QuadConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Upper,
    Lower,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Upper => "upper",
            BoundKind::Lower => "lower",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundSpec {
    /// 1-based bound index.
    pub id: usize,
    pub kind: BoundKind,
    pub scope: Subset,
    /// A `const(c)` lifetime is a fixed bound.
    pub life: DistributionSpec,
}

impl BoundSpec {
    pub fn new(id: usize, kind: BoundKind, scope: Subset, life: DistributionSpec) -> Result<Self> {
        if id == 0 {
            return Err(Error::Model("bound ids start at 1".into()));
        }
        if scope.is_empty() {
            return Err(Error::Model(format!("bound {id} has an empty scope")));
        }
        life.validate()?;
        Ok(Self { id, kind, scope, life })
    }

    pub fn upper(id: usize, scope: Subset, life: DistributionSpec) -> Result<Self> {
        Self::new(id, BoundKind::Upper, scope, life)
    }

    pub fn lower(id: usize, scope: Subset, life: DistributionSpec) -> Result<Self> {
        Self::new(id, BoundKind::Lower, scope, life)
    }

    pub fn is_constant(&self) -> bool {
        self.life.is_deterministic()
    }
}

/// Bounds sorted by id, checked to be `1..=m` and to fit inside `[n]`.
fn checked_bounds(n: usize, bounds: &[BoundSpec]) -> Result<Vec<BoundSpec>> {
    let mut sorted = bounds.to_vec();
    sorted.sort_by_key(|b| b.id);
    for (k, b) in sorted.iter().enumerate() {
        if k > 0 && sorted[k - 1].id == b.id {
            return Err(Error::Model(format!("duplicate bound id {}", b.id)));
        }
        if b.id != k + 1 {
            return Err(Error::Model(format!("bound ids must be 1..={}, found {}", sorted.len(), b.id)));
        }
        if b.scope.is_empty() {
            return Err(Error::Model(format!("bound {} has an empty scope", b.id)));
        }
        if !b.scope.is_subset_of(Subset::full(n)) {
            let outside: Vec<_> = b.scope.members().filter(|&i| i > n).collect();
            return Err(Error::Model(format!(
                "bound {} covers undeclared component {} (n = {n})",
                b.id, outside[0]
            )));
        }
    }
    if n + sorted.len() > MAX_UNITS {
        return Err(Error::TooManyUnits {
            count: n + sorted.len(),
            max: MAX_UNITS,
        });
    }
    Ok(sorted)
}

/// Default interaction of component `i` with the bounds covering it: lowers inside, uppers outside.
pub fn default_interaction(i: usize, bounds: &[BoundSpec]) -> LatticeExpr {
    let covering = |kind| {
        bounds
            .iter()
            .filter(move |b| b.kind == kind && b.scope.contains(i))
            .map(|b| LatticeExpr::Bound(b.id))
    };
    let lowers: Vec<_> = covering(BoundKind::Lower).collect();
    let inner = if lowers.is_empty() {
        LatticeExpr::Var(i)
    } else {
        LatticeExpr::max(std::iter::once(LatticeExpr::Var(i)).chain(lowers).collect())
    };
    let uppers: Vec<_> = covering(BoundKind::Upper).collect();
    if uppers.is_empty() {
        inner
    } else {
        LatticeExpr::min(std::iter::once(inner).chain(uppers).collect())
    }
}

fn check_override(i: usize, e: &LatticeExpr, n: usize, m: usize) -> Result<()> {
    if e.has_constants() {
        return Err(Error::Model(format!("interaction q.{i} may not contain constants")));
    }
    if e.max_bound() > m {
        return Err(Error::Model(format!("interaction q.{i} references undeclared bound q{}", e.max_bound())));
    }
    let others: Vec<_> = e.variables().members().filter(|&x| x != i).collect();
    if let Some(x) = others.first() {
        return Err(Error::Model(format!("interaction q.{i} may only use x{i}, found x{x}")));
    }
    if i == 0 || i > n {
        return Err(Error::Model(format!("interaction q.{i} names an undeclared component")));
    }
    Ok(())
}

/// Per-component interactions: overrides where given, the default elsewhere.
fn interactions(
    n: usize,
    bounds: &[BoundSpec],
    overrides: &BTreeMap<usize, LatticeExpr>,
) -> Result<BTreeMap<usize, LatticeExpr>> {
    for (&i, e) in overrides {
        check_override(i, e, n, bounds.len())?;
    }
    Ok((1..=n)
        .map(|i| {
            let q = overrides.get(&i).cloned().unwrap_or_else(|| default_interaction(i, bounds));
            (i, q)
        })
        .collect())
}

/// The `(n + m)`-unit system: components `1..=n`, bound `j` at `n + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSystem {
    n: usize,
    bounds: Vec<BoundSpec>,
    /// Expression over `x1..xn` and `q1..qm`.
    expr: LatticeExpr,
    set_function: SetFunction,
    mobius: MobiusVector,
}

/// Composes the structure with the bound interactions.
pub fn apply_bounds(structure: &LatticeExpr, n: usize, bounds: &[BoundSpec]) -> Result<AugmentedSystem> {
    apply_bounds_with(structure, n, bounds, &BTreeMap::new())
}

/// [`apply_bounds`] with explicit interactions `q_i` for some components.
pub fn apply_bounds_with(
    structure: &LatticeExpr,
    n: usize,
    bounds: &[BoundSpec],
    overrides: &BTreeMap<usize, LatticeExpr>,
) -> Result<AugmentedSystem> {
    structure.validate(n)?;
    if structure.has_constants() {
        return Err(Error::ConstantInBinary);
    }
    let bounds = checked_bounds(n, bounds)?;
    let expr = structure.substitute(&interactions(n, &bounds, overrides)?, false)?;
    let set_function = expr.resolve_bounds(n).to_set_function(n + bounds.len())?;
    let mobius = MobiusVector::of(&set_function);
    Ok(AugmentedSystem {
        n,
        bounds,
        expr,
        set_function,
        mobius,
    })
}

impl AugmentedSystem {
    pub fn components(&self) -> usize {
        self.n
    }

    pub fn bound_count(&self) -> usize {
        self.bounds.len()
    }

    pub fn units(&self) -> usize {
        self.n + self.bounds.len()
    }

    pub fn bounds(&self) -> &[BoundSpec] {
        &self.bounds
    }

    /// Expression over `x1..xn` and `q1..qm`.
    pub fn expr(&self) -> &LatticeExpr {
        &self.expr
    }

    /// Expression with bound `j` renamed to `x_{n+j}`.
    pub fn resolved_expr(&self) -> LatticeExpr {
        self.expr.resolve_bounds(self.n)
    }

    pub fn set_function(&self) -> &SetFunction {
        &self.set_function
    }

    pub fn mobius(&self) -> &MobiusVector {
        &self.mobius
    }

    /// `x3` for components, `q1` for bounds; `unit` is a 1-based index into the augmented system.
    pub fn label(&self, unit: usize) -> String {
        if unit <= self.n {
            format!("x{unit}")
        } else {
            format!("q{}", unit - self.n)
        }
    }

    /// Augmented unit set of the component part `a` and bound part `b`.
    pub fn join(&self, a: Subset, b: Subset) -> Subset {
        Subset(a.bits() | b.bits() << self.n)
    }

    /// Splits an augmented unit set into its component and bound parts.
    pub fn split(&self, c: Subset) -> (Subset, Subset) {
        let low = (1u32 << self.n) - 1;
        (Subset(c.bits() & low), Subset(c.bits() >> self.n))
    }

    /// Set function on `[n]` obtained with every upper bound at `+∞` and every lower bound at 0.
    pub fn projection(&self) -> Result<SetFunction> {
        let uppers = Subset::from_members(
            self.bounds
                .iter()
                .filter(|b| b.kind == BoundKind::Upper)
                .map(|b| b.id),
        );
        SetFunction::from_fn(self.n, |a| self.set_function.value(self.join(a, uppers)))
    }

    pub fn bound_lifetimes(&self) -> Vec<DistributionSpec> {
        self.bounds.iter().map(|b| b.life).collect()
    }

    fn check_inputs(&self, comps: &[DistributionSpec], bound_joint: &dyn JointSurvivalOracle) -> Result<()> {
        if comps.len() != self.n {
            return Err(Error::Model(format!("{} component lifetimes for {} components", comps.len(), self.n)));
        }
        if bound_joint.n() != self.bounds.len() {
            return Err(Error::Model(format!(
                "bound oracle covers {} bounds, system has {}",
                bound_joint.n(),
                self.bounds.len()
            )));
        }
        Ok(())
    }
}

/// `Σ_{A⊆[n]} Σ_{B⊆[m]} m(A ⊕ B) R_b(B, t) Π_{i∈A} R_i(t)`.
pub fn bounded_reliability(
    aug: &AugmentedSystem,
    comps: &[DistributionSpec],
    bound_joint: &dyn JointSurvivalOracle,
    t: f64,
) -> Result<f64> {
    aug.check_inputs(comps, bound_joint)?;
    let mut total = 0.0;
    for (c, coeff) in aug.mobius.nonzero() {
        let (a, b) = aug.split(c);
        let rb = bound_joint.survival(b, t);
        if !(-1e-12..=1.0 + 1e-12).contains(&rb) {
            return Err(Error::Oracle(format!("bound survival of {b} at t = {t} is {rb}")));
        }
        let ra: f64 = a.members().map(|i| comps[i - 1].survival(t)).product();
        total += coeff as f64 * rb * ra;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// [`bounded_reliability`] with mutually independent bounds.
pub fn bounded_reliability_independent(aug: &AugmentedSystem, comps: &[DistributionSpec], t: f64) -> Result<f64> {
    bounded_reliability(aug, comps, &IndependentOracle::new(aug.bound_lifetimes()), t)
}

/// `∫_0^∞ R_S(t) dt` of [`bounded_reliability`]; closed form when every
/// lifetime is exponential and the bounds are independent.
pub fn bounded_mttf(
    aug: &AugmentedSystem,
    comps: &[DistributionSpec],
    bound_joint: &dyn JointSurvivalOracle,
    cfg: &QuadConfig,
) -> Result<IntegralEstimate> {
    aug.check_inputs(comps, bound_joint)?;
    let mut jumps: Vec<f64> = comps.iter().flat_map(|d| d.breakpoints()).collect();
    jumps.extend(bound_joint.breakpoints());
    jumps.sort_by(f64::total_cmp);
    jumps.dedup();
    try_mttf(|t| bounded_reliability(aug, comps, bound_joint, t), &jumps, cfg)
}

/// Closed-form MTTF when components and independent bounds are all exponential.
pub fn bounded_mttf_exponential(aug: &AugmentedSystem, comp_rates: &[f64], bound_rates: &[f64]) -> IntegralEstimate {
    assert_eq!(comp_rates.len(), aug.n);
    assert_eq!(bound_rates.len(), aug.bounds.len());
    let rates: Vec<f64> = comp_rates.iter().chain(bound_rates).copied().collect();
    mttf_exponential_closed(&aug.mobius, &rates)
}

/// Weighted lattice polynomial over the `n` intrinsic lifetimes with every
/// (constant) bound replaced by its value.
pub fn constant_bounds_weighted(structure: &LatticeExpr, n: usize, bounds: &[BoundSpec]) -> Result<LatticeExpr> {
    constant_bounds_weighted_with(structure, n, bounds, &BTreeMap::new())
}

pub fn constant_bounds_weighted_with(
    structure: &LatticeExpr,
    n: usize,
    bounds: &[BoundSpec],
    overrides: &BTreeMap<usize, LatticeExpr>,
) -> Result<LatticeExpr> {
    structure.validate(n)?;
    let bounds = checked_bounds(n, bounds)?;
    if let Some(b) = bounds.iter().find(|b| !b.is_constant()) {
        return Err(Error::Model(format!("bound {} has a random lifetime {}", b.id, b.life)));
    }
    let values: Vec<f64> = bounds.iter().map(|b| b.life.quantile(0.5)).collect();
    structure
        .substitute(&interactions(n, &bounds, overrides)?, false)?
        .pin_bounds(&values)
}

/// `Pr(p(T) > t)` for a weighted lattice polynomial `p` of independent lifetimes.
///
/// The event `p(T) > t` equals `p` evaluated on `{0, ∞}`-valued indicators, with
/// each constant `c` read as `∞` when `c > t` and 0 otherwise.
pub fn weighted_reliability(expr: &LatticeExpr, comps: &[DistributionSpec], t: f64) -> Result<f64> {
    let n = comps.len();
    expr.validate(n)?;
    let v = SetFunction::from_fn(n, |a| {
        let x: Vec<f64> = (1..=n).map(|i| if a.contains(i) { f64::INFINITY } else { 0.0 }).collect();
        expr.eval(&x).map(|y| y > t).unwrap_or(false)
    })?;
    let m = MobiusVector::of(&v);
    let total: f64 = m
        .nonzero()
        .map(|(a, c)| c as f64 * a.members().map(|i| comps[i - 1].survival(t)).product::<f64>())
        .sum();
    Ok(total.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_expr;

    fn exp(rate: f64) -> DistributionSpec {
        DistributionSpec::exponential(rate).unwrap()
    }

    fn s(m: &[usize]) -> Subset {
        Subset::from_members(m.iter().copied())
    }

    #[test]
    fn shared_upper_bound_on_series() {
        let aug = apply_bounds(
            &parse_expr("min(x1, x2)").unwrap(),
            2,
            &[BoundSpec::upper(1, s(&[1, 2]), exp(1.0)).unwrap()],
        )
        .unwrap();
        assert_eq!(aug.expr().to_string(), "min(x1, q1, x2, q1)");
        for c in Subset::full(3).subsets() {
            assert_eq!(aug.set_function().value(c), c == Subset::full(3), "{c}");
        }
        for t in [0.0, 0.3, 1.0, 4.0] {
            let r = bounded_reliability_independent(&aug, &[exp(1.0), exp(1.0)], t).unwrap();
            assert!((r - (-3.0 * t).exp()).abs() < 1e-15);
        }
        let mttf = bounded_mttf_exponential(&aug, &[1.0, 1.0], &[1.0]);
        assert!((mttf.value - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_component_bounds() {
        let x1 = parse_expr("x1").unwrap();
        let up = apply_bounds(&x1, 1, &[BoundSpec::upper(1, s(&[1]), exp(1.0)).unwrap()]).unwrap();
        let r = bounded_reliability_independent(&up, &[exp(1.0)], 0.7).unwrap();
        assert!((r - (-1.4f64).exp()).abs() < 1e-15);
        assert!((bounded_mttf_exponential(&up, &[1.0], &[1.0]).value - 0.5).abs() < 1e-15);

        let low = apply_bounds(&x1, 1, &[BoundSpec::lower(1, s(&[1]), exp(1.0)).unwrap()]).unwrap();
        assert_eq!(low.expr().to_string(), "max(x1, q1)");
        for c in Subset::full(2).subsets() {
            assert_eq!(low.set_function().value(c), !c.is_empty());
        }
        assert!((bounded_mttf_exponential(&low, &[1.0], &[1.0]).value - 1.5).abs() < 1e-15);
        let q = bounded_mttf(&low, &[exp(1.0)], &IndependentOracle::new(vec![exp(1.0)]), &QuadConfig::default())
            .unwrap();
        assert!((q.value - 1.5).abs() < 1e-8);
    }

    #[test]
    fn lower_and_upper_on_one_component() {
        let aug = apply_bounds(
            &parse_expr("x1").unwrap(),
            1,
            &[
                BoundSpec::lower(1, s(&[1]), exp(1.0)).unwrap(),
                BoundSpec::upper(2, s(&[1]), exp(1.0)).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(aug.expr().to_string(), "min(max(x1, q1), q2)");
        let pc = aug.set_function().minimal_paths_cuts().unwrap();
        assert_eq!(pc.paths, vec![s(&[1, 3]), s(&[2, 3])]);
    }

    #[test]
    fn projection_recovers_structure() {
        let structure = parse_expr("max(min(x1, x2), x3)").unwrap();
        let bounds = [
            BoundSpec::upper(1, s(&[1, 3]), exp(1.0)).unwrap(),
            BoundSpec::lower(2, s(&[2]), exp(2.0)).unwrap(),
        ];
        let aug = apply_bounds(&structure, 3, &bounds).unwrap();
        assert_eq!(aug.projection().unwrap(), structure.to_set_function(3).unwrap());
        assert_eq!(aug.label(4), "q1");
        assert_eq!(aug.label(2), "x2");
    }

    #[test]
    fn construction_errors() {
        let e = parse_expr("min(x1, x2)").unwrap();
        let b = |id, scope: &[usize]| BoundSpec::upper(id, s(scope), exp(1.0)).unwrap();
        assert!(apply_bounds(&e, 2, &[b(1, &[9])]).is_err());
        assert!(apply_bounds(&e, 2, &[b(1, &[1]), b(1, &[2])]).is_err());
        assert!(apply_bounds(&e, 2, &[b(2, &[1])]).is_err());
        assert!(BoundSpec::upper(1, Subset::EMPTY, exp(1.0)).is_err());
        let many: Vec<_> = (1..=23).map(|j| b(j, &[1])).collect();
        assert!(matches!(apply_bounds(&e, 2, &many), Err(Error::TooManyUnits { .. })));
    }

    #[test]
    fn overrides_replace_default_interaction() {
        let e = parse_expr("min(x1, x2)").unwrap();
        let bounds = [BoundSpec::upper(1, s(&[1]), exp(1.0)).unwrap()];
        let mut o = BTreeMap::new();
        o.insert(1, crate::dsl::parse_expr_with("max(x1, q1)", crate::dsl::ExprOptions::BOUNDS).unwrap());
        let aug = apply_bounds_with(&e, 2, &bounds, &o).unwrap();
        assert_eq!(aug.expr().to_string(), "min(max(x1, q1), x2)");
        o.insert(1, crate::dsl::parse_expr_with("max(x2, q1)", crate::dsl::ExprOptions::BOUNDS).unwrap());
        assert!(apply_bounds_with(&e, 2, &bounds, &o).is_err());
    }

    #[test]
    fn constant_bounds() {
        let x1 = parse_expr("x1").unwrap();
        let c5 = DistributionSpec::deterministic(5.0).unwrap();
        let w = constant_bounds_weighted(&x1, 1, &[BoundSpec::upper(1, s(&[1]), c5).unwrap()]).unwrap();
        assert_eq!(w.eval(&[3.0]).unwrap(), 3.0);
        assert_eq!(w.eval(&[9.0]).unwrap(), 5.0);
        let c2 = DistributionSpec::deterministic(2.0).unwrap();
        let w = constant_bounds_weighted(&x1, 1, &[BoundSpec::lower(1, s(&[1]), c2).unwrap()]).unwrap();
        assert_eq!(w.eval(&[1.0]).unwrap(), 2.0);
        assert!(constant_bounds_weighted(&x1, 1, &[BoundSpec::lower(1, s(&[1]), exp(1.0)).unwrap()]).is_err());
    }

    #[test]
    fn constant_bound_paths_agree() {
        let e = parse_expr("min(x1, x2)").unwrap();
        let c = 1.25;
        let bounds = [BoundSpec::upper(1, s(&[1, 2]), DistributionSpec::deterministic(c).unwrap()).unwrap()];
        let comps = [exp(1.0), exp(2.0)];
        let aug = apply_bounds(&e, 2, &bounds).unwrap();
        let w = constant_bounds_weighted(&e, 2, &bounds).unwrap();
        for k in 0..40 {
            let t = k as f64 * 0.05;
            let a = bounded_reliability_independent(&aug, &comps, t).unwrap();
            let b = weighted_reliability(&w, &comps, t).unwrap();
            let expected = if t < c { (-3.0 * t).exp() } else { 0.0 };
            assert!((a - expected).abs() < 1e-15 && (b - expected).abs() < 1e-15, "t={t}: {a} {b}");
        }
        let mttf = bounded_mttf(&aug, &comps, &IndependentOracle::new(aug.bound_lifetimes()), &QuadConfig::default())
            .unwrap();
        assert!((mttf.value - (1.0 - (-3.0 * c).exp()) / 3.0).abs() < 1e-9);
    }
}
