//! Bayes-dependence (conditionally independent lifetimes given random factors)
//! and pre-phase dependence (a shared initial period followed by conditionally
//! independent decay phases).

use std::cell::Cell;
use std::fmt;

use crate::distribution::DistributionSpec;
use crate::dsl::RateExpr;
use crate::error::{Error, Result};
use crate::lattice::{MobiusVector, Subset};
use crate::quadrature::{
    try_integrate, try_integrate_survival, try_integrate_to_infinity, IntegralEstimate, QuadConfig, QuadResult,
};

/// Allowed deviation of `∫ g` from 1.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// Sample points per factor for the positivity check.
const CHECK_POINTS: usize = 15;

/// Conditional lifetime law given factor values, with parameters as rate expressions.
#[derive(Debug, Clone, PartialEq)]
pub enum ConditionalLaw {
    /// `R(t | u) = exp(-λ(u) t)`.
    Exponential { rate: RateExpr },
    Uniform { lo: RateExpr, hi: RateExpr },
    Weibull { shape: RateExpr, scale: RateExpr },
    Deterministic { value: RateExpr },
}

impl ConditionalLaw {
    pub fn exponential(rate: RateExpr) -> Self {
        ConditionalLaw::Exponential { rate }
    }

    /// Constant-rate exponential law.
    pub fn constant_rate(rate: f64) -> Self {
        ConditionalLaw::Exponential {
            rate: RateExpr::Num(rate),
        }
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self, ConditionalLaw::Exponential { .. })
    }

    pub fn max_factor(&self) -> usize {
        match self {
            ConditionalLaw::Exponential { rate } => rate.max_factor(),
            ConditionalLaw::Uniform { lo, hi } => lo.max_factor().max(hi.max_factor()),
            ConditionalLaw::Weibull { shape, scale } => shape.max_factor().max(scale.max_factor()),
            ConditionalLaw::Deterministic { value } => value.max_factor(),
        }
    }

    /// `λ(u)` for an exponential law.
    pub fn rate_at(&self, u: &[f64]) -> Option<f64> {
        match self {
            ConditionalLaw::Exponential { rate } => Some(rate.eval(u)),
            _ => None,
        }
    }

    /// The law at factor value `u` as an ordinary distribution.
    pub fn instantiate(&self, u: &[f64]) -> Result<DistributionSpec> {
        let at = |what: &str, e: Result<DistributionSpec>| {
            e.map_err(|err| Error::Model(format!("{what} at u = {u:?}: {err}")))
        };
        match self {
            ConditionalLaw::Exponential { rate } => at("rate", DistributionSpec::exponential(rate.eval(u))),
            ConditionalLaw::Uniform { lo, hi } => at("uniform law", DistributionSpec::uniform(lo.eval(u), hi.eval(u))),
            ConditionalLaw::Weibull { shape, scale } => {
                at("weibull law", DistributionSpec::weibull(shape.eval(u), scale.eval(u)))
            }
            ConditionalLaw::Deterministic { value } => at("constant law", DistributionSpec::deterministic(value.eval(u))),
        }
    }

    /// `R(t | u)`. A zero exponential rate means the unit never fails.
    pub fn survival(&self, t: f64, u: &[f64]) -> Result<f64> {
        if let ConditionalLaw::Exponential { rate } = self {
            let lambda = rate.eval(u);
            if !(lambda >= 0.0) || lambda.is_infinite() {
                return Err(Error::Model(format!("rate {lambda} at u = {u:?} is not a nonnegative number")));
            }
            return Ok(if t <= 0.0 { 1.0 } else { (-lambda * t).exp() });
        }
        Ok(self.instantiate(u)?.survival(t))
    }

    /// Points where `R(· | u)` may jump or kink.
    pub fn breakpoints(&self, u: &[f64]) -> Vec<f64> {
        match self {
            ConditionalLaw::Exponential { .. } => Vec::new(),
            _ => self.instantiate(u).map(|d| d.breakpoints()).unwrap_or_default(),
        }
    }
}

impl fmt::Display for ConditionalLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionalLaw::Exponential { rate } => write!(f, "exp({rate})"),
            ConditionalLaw::Uniform { lo, hi } => write!(f, "uniform({lo}, {hi})"),
            ConditionalLaw::Weibull { shape, scale } => write!(f, "weibull({shape}, {scale})"),
            ConditionalLaw::Deterministic { value } => write!(f, "const({value})"),
        }
    }
}

/// `∫ g = 1` checked numerically; point masses pass trivially.
fn check_normalized(d: &DistributionSpec, cfg: &QuadConfig) -> Result<()> {
    if d.density(d.support_min()).is_none() {
        return Ok(());
    }
    let density = |x: f64| Ok(d.density(x).unwrap_or(0.0));
    let lo = d.support_min();
    let hi = d.support_max();
    let r = if hi.is_finite() {
        try_integrate(density, lo, hi, &d.breakpoints(), cfg)?
    } else {
        try_integrate_to_infinity(density, lo, cfg)?
    };
    if (r.value - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Model(format!("factor density {d} integrates to {}", r.value)));
    }
    Ok(())
}

/// Interior quantiles used to sample a factor's domain.
fn sample_points(d: &DistributionSpec, count: usize) -> Vec<f64> {
    if d.is_deterministic() {
        return vec![d.quantile(0.5)];
    }
    (1..=count).map(|k| d.quantile(k as f64 / (count + 1) as f64)).collect()
}

/// Calls `f` on every point of the product sample grid.
fn for_sample_grid(factors: &[DistributionSpec], mut f: impl FnMut(&[f64]) -> Result<()>) -> Result<()> {
    let per = match factors.len() {
        0 | 1 => CHECK_POINTS,
        2 => 9,
        _ => 4,
    };
    let axes: Vec<Vec<f64>> = factors.iter().map(|d| sample_points(d, per)).collect();
    let mut idx = vec![0usize; axes.len()];
    let mut u: Vec<f64> = axes.iter().map(|a| a[0]).collect();
    loop {
        f(&u)?;
        let mut k = 0;
        loop {
            if k == axes.len() {
                return Ok(());
            }
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                u[k] = axes[k][idx[k]];
                break;
            }
            idx[k] = 0;
            u[k] = axes[k][0];
            k += 1;
        }
    }
}

fn check_laws(laws: &[ConditionalLaw], factors: &[DistributionSpec], decay: bool) -> Result<()> {
    for (i, law) in laws.iter().enumerate() {
        if law.max_factor() > factors.len() {
            return Err(Error::Model(format!(
                "law of component {} references u{} but only {} factor(s) exist",
                i + 1,
                law.max_factor(),
                factors.len()
            )));
        }
    }
    for_sample_grid(factors, |u| {
        for (i, law) in laws.iter().enumerate() {
            let d = law
                .instantiate(u)
                .map_err(|e| Error::Model(format!("component {}: {e}", i + 1)))?;
            if decay && d.survival(0.0) < 1.0 {
                return Err(Error::Model(format!(
                    "decay law of component {} fails at time 0 for u = {u:?}",
                    i + 1
                )));
            }
        }
        Ok(())
    })
}

/// Random factors with independent one-dimensional densities and the
/// per-component conditional laws given them.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    factors: Vec<DistributionSpec>,
    laws: Vec<ConditionalLaw>,
}

impl FactorModel {
    pub fn new(factors: Vec<DistributionSpec>, laws: Vec<ConditionalLaw>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Model("a factor model needs at least one factor".into()));
        }
        if laws.is_empty() {
            return Err(Error::Model("a factor model needs at least one component law".into()));
        }
        let cfg = QuadConfig::default();
        for d in &factors {
            d.validate()?;
            check_normalized(d, &cfg)?;
        }
        check_laws(&laws, &factors, false)?;
        Ok(Self { factors, laws })
    }

    pub fn factors(&self) -> &[DistributionSpec] {
        &self.factors
    }

    pub fn laws(&self) -> &[ConditionalLaw] {
        &self.laws
    }

    pub fn n(&self) -> usize {
        self.laws.len()
    }
}

/// `E[h(U_1, ..., U_m)]` over independent factors; inner dimensions use a
/// tolerance ten times tighter than the one around them.
pub fn factor_expectation(
    factors: &[DistributionSpec],
    h: &mut dyn FnMut(&[f64]) -> Result<f64>,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    let mut u = vec![0.0; factors.len()];
    expect_from(factors, 0, &mut u, h, cfg)
}

fn expect_from(
    factors: &[DistributionSpec],
    k: usize,
    u: &mut Vec<f64>,
    h: &mut dyn FnMut(&[f64]) -> Result<f64>,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    if k == factors.len() {
        return Ok(QuadResult {
            value: h(u)?,
            abs_error: 0.0,
            converged: true,
        });
    }
    let d = factors[k];
    if d.is_deterministic() {
        u[k] = d.quantile(0.5);
        return expect_from(factors, k + 1, u, h, cfg);
    }
    let inner = cfg.tightened(10.0);
    let mut integrand = |x: f64| -> Result<f64> {
        let g = d.density(x).unwrap_or(0.0);
        if g == 0.0 {
            return Ok(0.0);
        }
        u[k] = x;
        let r = expect_from(factors, k + 1, u, h, &inner)?;
        if !r.converged {
            return Err(Error::Tolerance { achieved: r.abs_error });
        }
        Ok(g * r.value)
    };
    let lo = d.support_min();
    let hi = d.support_max();
    if hi.is_finite() {
        try_integrate(&mut integrand, lo, hi, &d.breakpoints(), cfg)
    } else {
        try_integrate_to_infinity(&mut integrand, lo, cfg)
    }
}

fn product_survival(laws: &[ConditionalLaw], a: Subset, t: f64, u: &[f64]) -> Result<f64> {
    let mut p = 1.0;
    for i in a.members() {
        p *= laws[i - 1].survival(t, u)?;
        if p == 0.0 {
            break;
        }
    }
    Ok(p)
}

/// `Σ_A m(A) Π_{i∈A} R_i(t | u)`.
fn conditional_reliability(m: &MobiusVector, laws: &[ConditionalLaw], t: f64, u: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for (a, c) in m.nonzero() {
        total += c as f64 * product_survival(laws, a, t, u)?;
    }
    Ok(total)
}

fn conditional_breakpoints(laws: &[ConditionalLaw], u: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = laws.iter().flat_map(|l| l.breakpoints(u)).collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// `MTTF*(u) = ∫_0^∞ Σ_A m(A) Π_{i∈A} R_i(t | u) dt`, in closed form for exponential laws.
fn conditional_mttf(m: &MobiusVector, laws: &[ConditionalLaw], u: &[f64], cfg: &QuadConfig) -> Result<IntegralEstimate> {
    if laws.iter().all(ConditionalLaw::is_exponential) {
        let mut total = 0.0;
        for (a, c) in m.nonzero() {
            let lambda: f64 = a.members().map(|i| laws[i - 1].rate_at(u).unwrap_or(f64::NAN)).sum();
            if lambda.is_nan() || lambda < 0.0 {
                return Err(Error::Model(format!("negative or undefined rate at u = {u:?}")));
            }
            if lambda == 0.0 {
                return Ok(IntegralEstimate::divergent());
            }
            total += c as f64 / lambda;
        }
        return Ok(IntegralEstimate::exact(total));
    }
    let jumps = conditional_breakpoints(laws, u);
    try_integrate_survival(|t| conditional_reliability(m, laws, t, u), &jumps, cfg)
}

fn check_arity(m: &MobiusVector, laws: usize) -> Result<()> {
    if m.n() != laws {
        return Err(Error::Model(format!("structure has {} components but {laws} laws are given", m.n())));
    }
    Ok(())
}

/// `R_S(t) = Σ_A m(A) ∫ g(u) Π_{i∈A} R_i(t | u) du`, one quadrature per nonzero coefficient.
pub fn bayes_reliability(m: &MobiusVector, fm: &FactorModel, t: f64, cfg: &QuadConfig) -> Result<f64> {
    check_arity(m, fm.n())?;
    if t <= 0.0 {
        return Ok(1.0);
    }
    let mut total = 0.0;
    for (a, c) in m.nonzero() {
        let r = factor_expectation(&fm.factors, &mut |u| product_survival(&fm.laws, a, t, u), cfg)?;
        if !r.converged {
            return Err(Error::Tolerance { achieved: r.abs_error });
        }
        total += c as f64 * r.value;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// `MTTF = E[MTTF*(U)]`; with exponential laws `Σ_A m(A) ∫ g(u) / λ_A(u) du`.
pub fn bayes_mttf(m: &MobiusVector, fm: &FactorModel, cfg: &QuadConfig) -> Result<IntegralEstimate> {
    check_arity(m, fm.n())?;
    if fm.laws.iter().all(ConditionalLaw::is_exponential) {
        let mut value = 0.0;
        let mut abs_error = 0.0;
        for (a, c) in m.nonzero() {
            let r = expected_finite(&fm.factors, cfg, |u| {
                let lambda: f64 = a.members().map(|i| fm.laws[i - 1].rate_at(u).unwrap_or(f64::NAN)).sum();
                if lambda.is_nan() || lambda < 0.0 {
                    return Err(Error::Model(format!("negative or undefined rate at u = {u:?}")));
                }
                Ok(if lambda == 0.0 { f64::INFINITY } else { 1.0 / lambda })
            })?;
            match r {
                Some(q) => {
                    value += c as f64 * q.value;
                    abs_error += c.unsigned_abs() as f64 * q.abs_error;
                }
                None => return Ok(IntegralEstimate::divergent()),
            }
        }
        return Ok(IntegralEstimate {
            value,
            abs_error,
            diverged: false,
        });
    }
    let inner = cfg.tightened(10.0);
    let r = expected_finite(&fm.factors, cfg, |u| {
        let e = conditional_mttf(m, &fm.laws, u, &inner)?;
        Ok(if e.diverged { f64::INFINITY } else { e.value })
    })?;
    Ok(r.map_or_else(IntegralEstimate::divergent, |q| IntegralEstimate {
        value: q.value,
        abs_error: q.abs_error,
        diverged: false,
    }))
}

/// `E[h(U)]`, or `None` when `h` is infinite somewhere or the quadrature fails
/// to converge (the integral is then treated as divergent).
fn expected_finite(
    factors: &[DistributionSpec],
    cfg: &QuadConfig,
    mut h: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<Option<QuadResult>> {
    let infinite = Cell::new(false);
    let mut guarded = |u: &[f64]| -> Result<f64> {
        let y = h(u)?;
        if y.is_finite() {
            Ok(y)
        } else {
            infinite.set(true);
            Ok(0.0)
        }
    };
    match factor_expectation(factors, &mut guarded, cfg) {
        Ok(q) if q.converged && q.value.is_finite() && !infinite.get() => Ok(Some(q)),
        Ok(_) | Err(Error::Tolerance { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Shared pre-phase of random length `U`, then conditionally independent decay
/// phases with laws given `U = u`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrePhaseModel {
    prephase: DistributionSpec,
    decay: Vec<ConditionalLaw>,
}

impl PrePhaseModel {
    pub fn new(prephase: DistributionSpec, decay: Vec<ConditionalLaw>) -> Result<Self> {
        prephase.validate()?;
        if decay.is_empty() {
            return Err(Error::Model("a pre-phase model needs at least one decay law".into()));
        }
        check_normalized(&prephase, &QuadConfig::default())?;
        check_laws(&decay, &[prephase], true)?;
        Ok(Self { prephase, decay })
    }

    pub fn prephase(&self) -> &DistributionSpec {
        &self.prephase
    }

    pub fn decay(&self) -> &[ConditionalLaw] {
        &self.decay
    }

    pub fn n(&self) -> usize {
        self.decay.len()
    }
}

/// `R_S(t) = 1 - G(t) + ∫_0^t R*(t - u | u) dG(u)`; exactly 1 below the support of `U`.
pub fn prephase_reliability(m: &MobiusVector, pm: &PrePhaseModel, t: f64, cfg: &QuadConfig) -> Result<f64> {
    check_arity(m, pm.n())?;
    let g = pm.prephase;
    if t < g.support_min() {
        return Ok(1.0);
    }
    if g.is_deterministic() {
        let u0 = g.quantile(0.5);
        return Ok(conditional_reliability(m, &pm.decay, t - u0, &[u0])?.clamp(0.0, 1.0));
    }
    let lo = g.support_min();
    let hi = g.support_max().min(t);
    let r = try_integrate(
        |u| {
            let y = (t - u).max(0.0);
            Ok(conditional_reliability(m, &pm.decay, y, &[u])? * g.density(u).unwrap_or(0.0))
        },
        lo,
        hi,
        &g.breakpoints(),
        cfg,
    )?;
    if !r.converged {
        return Err(Error::Tolerance { achieved: r.abs_error });
    }
    Ok((g.survival(t) + r.value).clamp(0.0, 1.0))
}

/// `MTTF = E[U] + ∫ MTTF*(u) dG(u)`.
pub fn prephase_mttf(m: &MobiusVector, pm: &PrePhaseModel, cfg: &QuadConfig) -> Result<IntegralEstimate> {
    check_arity(m, pm.n())?;
    let inner = cfg.tightened(10.0);
    let r = expected_finite(&[pm.prephase], cfg, |u| {
        let e = conditional_mttf(m, &pm.decay, u, &inner)?;
        Ok(if e.diverged { f64::INFINITY } else { e.value })
    })?;
    Ok(match r {
        Some(q) => IntegralEstimate {
            value: pm.prephase.mean() + q.value,
            abs_error: q.abs_error,
            diverged: false,
        },
        None => IntegralEstimate::divergent(),
    })
}

/// Closed form for `U ~ uniform(a, b)` and constant decay rates.
pub fn prephase_uniform_exponential_closed(m: &MobiusVector, a: f64, b: f64, rates: &[f64], t: f64) -> f64 {
    assert_eq!(rates.len(), m.n(), "one rate per component");
    if t < a {
        return 1.0;
    }
    let width = b - a;
    let lambda_of = |s: Subset| s.members().map(|i| rates[i - 1]).sum::<f64>();
    if t <= b {
        let sum: f64 = m
            .nonzero()
            .map(|(s, c)| {
                let l = lambda_of(s);
                c as f64 * -(-l * (t - a)).exp_m1() / (l * width)
            })
            .sum();
        1.0 - (t - a) / width + sum
    } else {
        m.nonzero()
            .map(|(s, c)| {
                let l = lambda_of(s);
                c as f64 * (l * (b - t)).exp() * -(-l * width).exp_m1() / (l * width)
            })
            .sum()
    }
}
