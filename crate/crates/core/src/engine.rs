//! Exact system reliability and mean time-to-failure.
//!
//! Dependent lifetimes enter only through [`JointSurvivalOracle`], which answers
//! the two questions the reliability formulas need: the probability that all
//! members of a subset survive past `t`, and the probability that all of them
//! have failed by `t`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::distribution::DistributionSpec;
use crate::error::{Error, Result};
use crate::format::sig12;
use crate::grid::TimeGrid;
use crate::lattice::{MobiusVector, SetFunction, StructureForms, Subset};
use crate::quadrature::{integrate_survival, try_integrate_survival, IntegralEstimate, QuadConfig};

/// Slack allowed on probabilities returned by oracles and alternating sums.
pub const PROBABILITY_SLACK: f64 = 1e-9;

/// Joint lifetime law queried at arguments in `{t, ∞}` only.
///
/// Implementations must be callable from several threads at once.
pub trait JointSurvivalOracle: Send + Sync {
    /// Number of units the oracle describes.
    fn n(&self) -> usize;

    /// `Pr(T_i > t for all i in set)`; 1 for the empty set.
    fn survival(&self, set: Subset, t: f64) -> f64;

    /// `Pr(T_i <= t for all i in set)`; 1 for the empty set.
    fn failure(&self, set: Subset, t: f64) -> f64;

    /// Times where the joint law has atoms (jumps in `t`).
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Mutually independent lifetimes with the given marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependentOracle {
    marginals: Vec<DistributionSpec>,
}

impl IndependentOracle {
    pub fn new(marginals: Vec<DistributionSpec>) -> Self {
        Self { marginals }
    }

    pub fn marginals(&self) -> &[DistributionSpec] {
        &self.marginals
    }
}

impl JointSurvivalOracle for IndependentOracle {
    fn n(&self) -> usize {
        self.marginals.len()
    }

    fn survival(&self, set: Subset, t: f64) -> f64 {
        set.members().map(|i| self.marginals[i - 1].survival(t)).product()
    }

    fn failure(&self, set: Subset, t: f64) -> f64 {
        set.members().map(|i| self.marginals[i - 1].cdf(t)).product()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.marginals.iter().flat_map(|d| d.breakpoints()).collect()
    }
}

/// All `n` lifetimes equal to one common draw from `law`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComonotoneOracle {
    pub n: usize,
    pub law: DistributionSpec,
}

impl JointSurvivalOracle for ComonotoneOracle {
    fn n(&self) -> usize {
        self.n
    }

    fn survival(&self, set: Subset, t: f64) -> f64 {
        if set.is_empty() {
            1.0
        } else {
            self.law.survival(t)
        }
    }

    fn failure(&self, set: Subset, t: f64) -> f64 {
        if set.is_empty() {
            1.0
        } else {
            self.law.cdf(t)
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.law.breakpoints()
    }
}

/// Which of the two equivalent expansions to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Expansion in `v` (or `m_v`) with survival probabilities.
    Primal,
    /// Expansion in `v*` (or `m_{v*}`) with failure probabilities.
    Dual,
}

fn checked(p: f64, what: &str) -> Result<f64> {
    if p.is_nan() || p < -PROBABILITY_SLACK || p > 1.0 + PROBABILITY_SLACK {
        Err(Error::Oracle(format!("{what} returned {p}, outside [0, 1]")))
    } else {
        Ok(p)
    }
}

fn check_oracle_size(n: usize, oracle: &dyn JointSurvivalOracle) -> Result<()> {
    if oracle.n() != n {
        return Err(Error::Oracle(format!(
            "oracle describes {} units, system has {n}",
            oracle.n()
        )));
    }
    Ok(())
}

/// `Σ_A m(A) Π_{i∈A} p_i`: the reliability polynomial in Möbius form.
pub fn reliability_polynomial_eval(m: &MobiusVector, p: &[f64]) -> f64 {
    assert_eq!(p.len(), m.n(), "argument length must equal n");
    m.nonzero()
        .map(|(a, c)| c as f64 * a.members().map(|i| p[i - 1]).product::<f64>())
        .sum()
}

/// System reliability at `t` for independent components.
pub fn reliability_independent(m: &MobiusVector, comps: &[DistributionSpec], t: f64) -> f64 {
    let p: Vec<f64> = comps.iter().map(|d| d.survival(t)).collect();
    reliability_polynomial_eval(m, &p)
}

/// System reliability from a joint-law oracle via the Möbius expansions:
/// primal `Σ_A m_v(A) R(A, t)`, dual `1 - Σ_A m_{v*}(A) F(A, t)`.
pub fn reliability_general(
    forms: &StructureForms,
    oracle: &dyn JointSurvivalOracle,
    t: f64,
    side: Side,
) -> Result<f64> {
    check_oracle_size(forms.set_function().n(), oracle)?;
    let r = match side {
        Side::Primal => forms.mobius().nonzero().try_fold(0.0, |acc, (a, c)| {
            Ok::<_, Error>(acc + c as f64 * checked(oracle.survival(a, t), "survival")?)
        })?,
        Side::Dual => {
            1.0 - forms.dual_mobius().nonzero().try_fold(0.0, |acc, (a, c)| {
                Ok::<_, Error>(acc + c as f64 * checked(oracle.failure(a, t), "failure")?)
            })?
        }
    };
    Ok(r)
}

fn inverse_subset_sums_f64(xs: &mut [f64]) {
    let mut step = 1;
    while step < xs.len() {
        for block in xs.chunks_exact_mut(2 * step) {
            let (lo, hi) = block.split_at_mut(step);
            for (l, h) in lo.iter().zip(hi.iter_mut()) {
                *h -= *l;
            }
        }
        step <<= 1;
    }
}

/// `Pr(X(t) = e_A)`: exactly the members of `a` are working at time `t`.
///
/// Alternating sum over `B ⊆ A` of the probability that everything outside `B`
/// has failed.
pub fn state_distribution(oracle: &dyn JointSurvivalOracle, t: f64, a: Subset) -> Result<f64> {
    let n = oracle.n();
    let mut total = 0.0;
    for b in a.subsets() {
        let f = checked(oracle.failure(b.complement(n), t), "failure")?;
        if (a.len() - b.len()) % 2 == 0 {
            total += f;
        } else {
            total -= f;
        }
    }
    if total < -PROBABILITY_SLACK {
        return Err(Error::Oracle(format!(
            "state probability of {a} at t = {t} is {total}"
        )));
    }
    Ok(total)
}

/// The full state distribution at `t`, indexed by subset, in `n · 2^n` operations.
pub fn state_distributions(oracle: &dyn JointSurvivalOracle, t: f64) -> Result<Vec<f64>> {
    let n = oracle.n();
    let mut xs = (0..1u32 << n)
        .map(|b| checked(oracle.failure(Subset(b).complement(n), t), "failure"))
        .collect::<Result<Vec<f64>>>()?;
    inverse_subset_sums_f64(&mut xs);
    if let Some((a, p)) = xs.iter().enumerate().find(|(_, p)| **p < -PROBABILITY_SLACK) {
        return Err(Error::Oracle(format!(
            "state probability of {} at t = {t} is {p}",
            Subset(a as u32)
        )));
    }
    Ok(xs)
}

/// System reliability from the state distribution:
/// primal `Σ_A v(A) Pr(X = e_A)`, dual `1 - Σ_A v*(A) Pr(X = e_{[n]∖A})`.
pub fn reliability_from_states(
    v: &SetFunction,
    oracle: &dyn JointSurvivalOracle,
    t: f64,
    side: Side,
) -> Result<f64> {
    check_oracle_size(v.n(), oracle)?;
    let states = state_distributions(oracle, t)?;
    let n = v.n();
    Ok(match side {
        Side::Primal => Subset::full(n)
            .subsets()
            .filter(|&a| v.value(a))
            .map(|a| states[a.index()])
            .sum(),
        Side::Dual => {
            let dual = v.dual();
            1.0 - Subset::full(n)
                .subsets()
                .filter(|&a| dual.value(a))
                .map(|a| states[a.complement(n).index()])
                .sum::<f64>()
        }
    })
}

/// `Σ_{k=1}^n m̄(k) R(k, t)` for subset reliabilities that depend only on size.
pub fn reliability_symmetric(mbar: &[i64], subset_survival: impl Fn(usize) -> f64) -> f64 {
    mbar.iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &c)| c != 0)
        .map(|(k, &c)| c as f64 * subset_survival(k))
        .sum()
}

/// `1 - Σ_{k=1}^n m̄_{v*}(k) F(k, t)`.
pub fn reliability_symmetric_dual(mbar_dual: &[i64], subset_failure: impl Fn(usize) -> f64) -> f64 {
    1.0 - mbar_dual
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &c)| c != 0)
        .map(|(k, &c)| c as f64 * subset_failure(k))
        .sum::<f64>()
}

/// `∫_0^∞ R_S(t) dt` by adaptive quadrature; `jumps` become panel boundaries.
pub fn mttf(reliability: impl Fn(f64) -> f64, jumps: &[f64], cfg: &QuadConfig) -> IntegralEstimate {
    integrate_survival(reliability, jumps, cfg)
}

/// Fallible variant of [`mttf`].
pub fn try_mttf(
    reliability: impl FnMut(f64) -> Result<f64>,
    jumps: &[f64],
    cfg: &QuadConfig,
) -> Result<IntegralEstimate> {
    try_integrate_survival(reliability, jumps, cfg)
}

/// `Σ_A m(A) / λ_A` with `λ_A = Σ_{i∈A} λ_i`.
pub fn mttf_exponential_closed(m: &MobiusVector, rates: &[f64]) -> IntegralEstimate {
    assert_eq!(rates.len(), m.n(), "one rate per component");
    let mut total = 0.0;
    for (a, c) in m.nonzero() {
        let lambda: f64 = a.members().map(|i| rates[i - 1]).sum();
        if !(lambda > 0.0) {
            return IntegralEstimate::divergent();
        }
        total += c as f64 / lambda;
    }
    IntegralEstimate::exact(total)
}

/// Exact rational version of [`mttf_exponential_closed`]; `None` when some
/// contributing subset has zero total rate.
pub fn mttf_exponential_exact(m: &MobiusVector, rates: &[BigRational]) -> Option<BigRational> {
    assert_eq!(rates.len(), m.n(), "one rate per component");
    let mut total = BigRational::zero();
    for (a, c) in m.nonzero() {
        let lambda = a
            .members()
            .fold(BigRational::zero(), |acc, i| acc + &rates[i - 1]);
        if lambda.is_zero() {
            return None;
        }
        total += BigRational::from_integer(BigInt::from(c)) / lambda;
    }
    Some(total)
}

/// Sampled `t ↦ R_S(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// How the values were obtained, e.g. `independent-mobius`.
    pub method: String,
    /// Error tolerance the values were computed to.
    pub abs_tol: f64,
}

/// Tolerance for the curve shape checks (range and monotonicity).
pub const CURVE_SLACK: f64 = 1e-9;

impl ReliabilityCurve {
    pub fn new(grid: &TimeGrid, values: Vec<f64>, method: impl Into<String>, abs_tol: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Structure("one value per grid point required".into()));
        }
        if let Some(v) = values
            .iter()
            .find(|v| v.is_nan() || **v < -CURVE_SLACK || **v > 1.0 + CURVE_SLACK)
        {
            return Err(Error::Oracle(format!("reliability value {v} outside [0, 1]")));
        }
        if let Some(w) = values.windows(2).find(|w| w[1] > w[0] + CURVE_SLACK) {
            return Err(Error::Oracle(format!(
                "reliability increases from {} to {}",
                w[0], w[1]
            )));
        }
        Ok(Self {
            grid: grid.points().to_vec(),
            values,
            method: method.into(),
            abs_tol,
        })
    }

    /// Evaluates `reliability` at every grid point, in parallel.
    pub fn compute(
        grid: &TimeGrid,
        reliability: impl Fn(f64) -> Result<f64> + Sync,
        method: impl Into<String>,
        abs_tol: f64,
    ) -> Result<Self> {
        let values = grid
            .points()
            .par_iter()
            .map(|&t| reliability(t))
            .collect::<Result<Vec<f64>>>()?;
        Self::new(grid, values, method, abs_tol)
    }

    /// CSV with header `t,R_S`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,R_S\n");
        for (t, r) in self.grid.iter().zip(&self.values) {
            out.push_str(&sig12(*t));
            out.push(',');
            out.push_str(&sig12(*r));
            out.push('\n');
        }
        out
    }
}
