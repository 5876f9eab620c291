//! Exact reliability and MTTF of a parsed model, dispatched on its dependence kind.

use crate::bounds::{
    apply_bounds_with, bounded_mttf, bounded_mttf_exponential, bounded_reliability_independent, AugmentedSystem,
};
use crate::dependence::{
    bayes_mttf, bayes_reliability, prephase_mttf, prephase_reliability, prephase_uniform_exponential_closed,
};
use crate::distribution::DistributionSpec;
use crate::dsl::{Dependence, SystemModel};
use crate::engine::{mttf_exponential_closed, reliability_independent, try_mttf, IndependentOracle, ReliabilityCurve};
use crate::error::Result;
use crate::grid::TimeGrid;
use crate::lattice::{MobiusVector, SetFunction};
use crate::quadrature::{IntegralEstimate, QuadConfig};

fn rates(laws: &[DistributionSpec]) -> Option<Vec<f64>> {
    laws.iter().map(DistributionSpec::rate).collect()
}

fn jumps(laws: &[DistributionSpec]) -> Vec<f64> {
    let mut out: Vec<f64> = laws.iter().flat_map(|d| d.breakpoints()).collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// A validated, semicoherent model with its transforms precomputed.
pub struct Analysis {
    model: SystemModel,
    v: SetFunction,
    m: MobiusVector,
    aug: Option<AugmentedSystem>,
    cfg: QuadConfig,
}

impl Analysis {
    pub fn new(model: &SystemModel, cfg: QuadConfig) -> Result<Self> {
        model.validate()?;
        let v = model.set_function()?;
        v.require_semicoherent()?;
        let aug = match &model.dependence {
            Dependence::Bounds(b) => Some(apply_bounds_with(&model.expr()?, model.n, &b.bounds, &b.interactions)?),
            _ => None,
        };
        Ok(Self {
            model: model.clone(),
            m: MobiusVector::of(&v),
            v,
            aug,
            cfg,
        })
    }

    pub fn model(&self) -> &SystemModel {
        &self.model
    }

    pub fn set_function(&self) -> &SetFunction {
        &self.v
    }

    pub fn mobius(&self) -> &MobiusVector {
        &self.m
    }

    pub fn augmented(&self) -> Option<&AugmentedSystem> {
        self.aug.as_ref()
    }

    /// Constant decay rates when the pre-phase is uniform, enabling the closed form.
    fn uniform_prephase(&self) -> Option<(f64, f64, Vec<f64>)> {
        let Dependence::PrePhase(pm) = &self.model.dependence else {
            return None;
        };
        let DistributionSpec::Uniform { lo, hi } = *pm.prephase() else {
            return None;
        };
        let rates: Option<Vec<f64>> = pm
            .decay()
            .iter()
            .map(|l| match l {
                crate::dependence::ConditionalLaw::Exponential { rate } => rate.as_constant(),
                _ => None,
            })
            .collect();
        rates.map(|r| (lo, hi, r))
    }

    /// Short name of the computation behind [`Analysis::reliability`].
    pub fn method(&self) -> &'static str {
        match &self.model.dependence {
            Dependence::Independent => "independent-mobius",
            Dependence::Bayes(_) => "bayes-quadrature",
            Dependence::PrePhase(_) if self.uniform_prephase().is_some() => "prephase-uniform-closed",
            Dependence::PrePhase(_) => "prephase-quadrature",
            Dependence::Bounds(_) => "augmented-mobius",
        }
    }

    pub fn reliability(&self, t: f64) -> Result<f64> {
        match &self.model.dependence {
            Dependence::Independent => Ok(reliability_independent(&self.m, &self.model.components, t)),
            Dependence::Bayes(fm) => bayes_reliability(&self.m, fm, t, &self.cfg),
            Dependence::PrePhase(pm) => match self.uniform_prephase() {
                Some((a, b, rates)) => Ok(prephase_uniform_exponential_closed(&self.m, a, b, &rates, t).clamp(0.0, 1.0)),
                None => prephase_reliability(&self.m, pm, t, &self.cfg),
            },
            Dependence::Bounds(_) => {
                bounded_reliability_independent(self.aug.as_ref().expect("built in new"), &self.model.components, t)
            }
        }
    }

    pub fn curve(&self, grid: &TimeGrid) -> Result<ReliabilityCurve> {
        ReliabilityCurve::compute(grid, |t| self.reliability(t), self.method(), self.cfg.abs_tol)
    }

    pub fn mttf(&self) -> Result<IntegralEstimate> {
        let comps = &self.model.components;
        match &self.model.dependence {
            Dependence::Independent => match rates(comps) {
                Some(r) => Ok(mttf_exponential_closed(&self.m, &r)),
                None => try_mttf(|t| Ok(reliability_independent(&self.m, comps, t)), &jumps(comps), &self.cfg),
            },
            Dependence::Bayes(fm) => bayes_mttf(&self.m, fm, &self.cfg),
            Dependence::PrePhase(pm) => prephase_mttf(&self.m, pm, &self.cfg),
            Dependence::Bounds(_) => {
                let aug = self.aug.as_ref().expect("built in new");
                let bound_laws = aug.bound_lifetimes();
                match (rates(comps), rates(&bound_laws)) {
                    (Some(rc), Some(rb)) => Ok(bounded_mttf_exponential(aug, &rc, &rb)),
                    _ => bounded_mttf(aug, comps, &IndependentOracle::new(bound_laws), &self.cfg),
                }
            }
        }
    }
}
