//! Random systems and models shared by the integration tests.
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use latrel::bounds::{BoundKind, BoundSpec};
use latrel::dependence::{ConditionalLaw, FactorModel, PrePhaseModel};
use latrel::dsl::{BoundsModel, Dependence, RateExpr, Structure, SystemModel};
use latrel::lattice::NormalForm;
use latrel::{DistributionSpec, LatticeExpr, SetFunction, Subset};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Arbitrary Boolean set function on `[n]`.
pub fn any_set_function(rng: &mut impl Rng, n: usize) -> SetFunction {
    let values = (0..1usize << n).map(|_| rng.random_bool(0.5)).collect();
    SetFunction::new(n, values).unwrap()
}

pub fn nonempty_subset(rng: &mut impl Rng, n: usize) -> Subset {
    Subset(rng.random_range(1..1u32 << n))
}

/// Upward closure of a few random nonempty path sets; always semicoherent.
pub fn semicoherent(rng: &mut impl Rng, n: usize) -> SetFunction {
    let k = rng.random_range(1..=4);
    let paths: Vec<Subset> = (0..k).map(|_| nonempty_subset(rng, n)).collect();
    SetFunction::from_paths(n, &paths).unwrap()
}

/// Semicoherent with every component relevant (some minimal path contains it).
pub fn semicoherent_covering(rng: &mut impl Rng, n: usize) -> SetFunction {
    let mut paths: Vec<Subset> = (0..rng.random_range(1..=4)).map(|_| nonempty_subset(rng, n)).collect();
    loop {
        let v = SetFunction::from_paths(n, &paths).unwrap();
        let covered = v.minimal_true_sets().into_iter().fold(Subset::EMPTY, Subset::union);
        match Subset::full(n).members().find(|&i| !covered.contains(i)) {
            None => return v,
            Some(i) => paths.push(Subset(rng.random_range(0..1u32 << n)).with(i)),
        }
    }
}

pub fn rates(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn exponentials(rates: &[f64]) -> Vec<DistributionSpec> {
    rates.iter().map(|&r| DistributionSpec::exponential(r).unwrap()).collect()
}

fn round(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

pub fn distribution(rng: &mut impl Rng) -> DistributionSpec {
    match rng.random_range(0..4) {
        0 => DistributionSpec::exponential(round(rng.random_range(0.1..5.0))).unwrap(),
        1 => {
            let lo = round(rng.random_range(0.0..2.0));
            DistributionSpec::uniform(lo, lo + round(rng.random_range(0.1..3.0))).unwrap()
        }
        2 => DistributionSpec::weibull(round(rng.random_range(0.5..3.0)), round(rng.random_range(0.2..4.0))).unwrap(),
        _ => DistributionSpec::deterministic(round(rng.random_range(0.1..4.0))).unwrap(),
    }
}

/// Positive rate expression in `u` for a factor supported on `[0, ∞)`.
fn rate_expr(rng: &mut impl Rng) -> RateExpr {
    let c = RateExpr::Num(round(rng.random_range(0.1..3.0)));
    match rng.random_range(0..3) {
        0 => c,
        1 => RateExpr::Add(
            Box::new(c),
            Box::new(RateExpr::Mul(
                Box::new(RateExpr::Num(round(rng.random_range(0.1..2.0)))),
                Box::new(RateExpr::Factor(1)),
            )),
        ),
        _ => RateExpr::Mul(Box::new(c), Box::new(RateExpr::Exp(Box::new(RateExpr::Neg(Box::new(RateExpr::Factor(1))))))),
    }
}

fn conditional_law(rng: &mut impl Rng) -> ConditionalLaw {
    if rng.random_bool(0.7) {
        ConditionalLaw::exponential(rate_expr(rng))
    } else {
        ConditionalLaw::Weibull {
            shape: RateExpr::Num(round(rng.random_range(0.5..3.0))),
            scale: rate_expr(rng),
        }
    }
}

fn bounds_model(rng: &mut impl Rng, n: usize) -> BoundsModel {
    let m = rng.random_range(1..=3);
    let bounds = (1..=m)
        .map(|id| {
            let kind = if rng.random_bool(0.5) { BoundKind::Upper } else { BoundKind::Lower };
            let life = DistributionSpec::exponential(round(rng.random_range(0.1..3.0))).unwrap();
            BoundSpec::new(id, kind, nonempty_subset(rng, n), life).unwrap()
        })
        .collect();
    BoundsModel {
        bounds,
        interactions: Default::default(),
    }
}

/// Random valid model of any dependence kind.
pub fn model(rng: &mut impl Rng, index: usize) -> SystemModel {
    let n = rng.random_range(1..=6);
    let v = semicoherent_covering(rng, n);
    let kind = rng.random_range(0..4);
    let structure = if kind != 3 && rng.random_bool(0.3) {
        Structure::Table(v)
    } else {
        let form = if rng.random_bool(0.5) {
            NormalForm::Disjunctive
        } else {
            NormalForm::Conjunctive
        };
        Structure::Expr(LatticeExpr::from_set_function(&v, form).unwrap())
    };
    let (components, dependence) = match kind {
        0 => ((0..n).map(|_| distribution(rng)).collect(), Dependence::Independent),
        1 => {
            let g = DistributionSpec::exponential(round(rng.random_range(0.5..3.0))).unwrap();
            let laws = (0..n).map(|_| conditional_law(rng)).collect();
            (Vec::new(), Dependence::Bayes(FactorModel::new(vec![g], laws).unwrap()))
        }
        2 => {
            let lo = round(rng.random_range(0.0..2.0));
            let g = DistributionSpec::uniform(lo, lo + round(rng.random_range(0.1..2.0))).unwrap();
            let laws = (0..n).map(|_| conditional_law(rng)).collect();
            (Vec::new(), Dependence::PrePhase(PrePhaseModel::new(g, laws).unwrap()))
        }
        _ => {
            let comps = (0..n)
                .map(|_| DistributionSpec::exponential(round(rng.random_range(0.1..5.0))).unwrap())
                .collect();
            (comps, Dependence::Bounds(bounds_model(rng, n)))
        }
    };
    SystemModel::new(format!("generated-{index}"), n, structure, components, dependence).unwrap()
}
