mod common;

use proptest::prelude::*;

use latrel::bounds::{apply_bounds, bounded_reliability_independent, BoundKind, BoundSpec};
use latrel::dependence::{bayes_reliability, FactorModel};
use latrel::dsl::{parse_distribution, parse_law, parse_model_bytes, RateExpr};
use latrel::engine::{reliability_general, reliability_independent, IndependentOracle, Side};
use latrel::lattice::{NormalForm, StructureForm, StructureForms};
use latrel::{
    parse_expr, parse_model, serialize_model, DistributionSpec, LatticeExpr, MobiusVector, QuadConfig, SetFunction,
    Subset,
};

fn set_function() -> impl Strategy<Value = SetFunction> {
    (1usize..=8).prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), 1 << n).prop_map(move |bits| SetFunction::new(n, bits).unwrap())
    })
}

fn semicoherent() -> impl Strategy<Value = SetFunction> {
    (1usize..=7, any::<u64>()).prop_map(|(n, seed)| common::semicoherent(&mut common::rng(seed), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn zeta_inverts_mobius(v in set_function()) {
        prop_assert_eq!(MobiusVector::of(&v).zeta().unwrap(), v);
    }

    #[test]
    fn dual_is_an_involution(v in set_function()) {
        prop_assert_eq!(v.dual().dual(), v);
    }

    #[test]
    fn paths_of_dual_are_cuts(v in semicoherent()) {
        let pc = v.minimal_paths_cuts().unwrap();
        let dual = v.dual().minimal_paths_cuts().unwrap();
        prop_assert_eq!(pc.cuts, dual.paths);
        prop_assert_eq!(pc.paths, dual.cuts);
    }

    #[test]
    fn multilinear_forms_agree(v in semicoherent(), seed in any::<u64>()) {
        let n = v.n();
        let p = common::rates(&mut common::rng(seed), n, 0.0, 1.0);
        let forms = StructureForms::new(&v);
        let base = forms.eval(&p, StructureForm::Primal);
        for form in [StructureForm::Dual, StructureForm::PrimalMobius, StructureForm::DualMobius] {
            prop_assert!((forms.eval(&p, form) - base).abs() < 1e-12);
        }
        prop_assert!((0.0..=1.0 + 1e-12).contains(&base));
    }

    #[test]
    fn normal_form_expression_reproduces_set_function(v in semicoherent(), conjunctive in any::<bool>()) {
        let form = if conjunctive { NormalForm::Conjunctive } else { NormalForm::Disjunctive };
        let e = LatticeExpr::from_set_function(&v, form).unwrap();
        prop_assert_eq!(e.to_set_function(v.n()).unwrap(), v.clone());
        prop_assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn general_engine_matches_polynomial(v in semicoherent(), seed in any::<u64>(), t in 0.0f64..4.0) {
        let comps = common::exponentials(&common::rates(&mut common::rng(seed), v.n(), 0.1, 5.0));
        let forms = StructureForms::new(&v);
        let oracle = IndependentOracle::new(comps.clone());
        let poly = reliability_independent(forms.mobius(), &comps, t);
        for side in [Side::Primal, Side::Dual] {
            prop_assert!((reliability_general(&forms, &oracle, t, side).unwrap() - poly).abs() < 1e-12);
        }
    }

    #[test]
    fn reliability_decreases_in_time(v in semicoherent(), seed in any::<u64>(), t in 0.0f64..3.0, dt in 0.0f64..1.0) {
        let mut rng = common::rng(seed);
        let comps: Vec<_> = (0..v.n()).map(|_| common::distribution(&mut rng)).collect();
        let m = MobiusVector::of(&v);
        let a = reliability_independent(&m, &comps, t);
        let b = reliability_independent(&m, &comps, t + dt);
        prop_assert!(b <= a + 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&a));
    }

    #[test]
    fn bounds_project_and_act_monotonically(
        v in semicoherent(),
        seed in any::<u64>(),
        upper in any::<bool>(),
        t in 0.0f64..3.0,
    ) {
        let n = v.n();
        let mut rng = common::rng(seed);
        let expr = LatticeExpr::from_set_function(&v, NormalForm::Disjunctive).unwrap();
        let comps = common::exponentials(&common::rates(&mut rng, n, 0.1, 3.0));
        let kind = if upper { BoundKind::Upper } else { BoundKind::Lower };
        let life = DistributionSpec::exponential(common::rates(&mut rng, 1, 0.1, 3.0)[0]).unwrap();
        let bound = BoundSpec::new(1, kind, common::nonempty_subset(&mut rng, n), life).unwrap();
        let aug = apply_bounds(&expr, n, &[bound]).unwrap();
        prop_assert_eq!(aug.projection().unwrap(), v.clone());
        let bounded = bounded_reliability_independent(&aug, &comps, t).unwrap();
        let free = reliability_independent(&MobiusVector::of(&v), &comps, t);
        if upper {
            prop_assert!(bounded <= free + 1e-12);
        } else {
            prop_assert!(bounded >= free - 1e-12);
        }
    }

    #[test]
    fn point_mass_factor_reduces_to_independence(
        v in semicoherent(),
        seed in any::<u64>(),
        c in 0.1f64..3.0,
        t in 0.0f64..3.0,
    ) {
        let n = v.n();
        let slopes = common::rates(&mut common::rng(seed), n, 0.1, 2.0);
        let laws = slopes
            .iter()
            .map(|&s| latrel::dependence::ConditionalLaw::exponential(RateExpr::parse(&format!("1 + {s} * u")).unwrap()))
            .collect();
        let fm = FactorModel::new(vec![DistributionSpec::deterministic(c).unwrap()], laws).unwrap();
        let m = MobiusVector::of(&v);
        let comps = common::exponentials(&slopes.iter().map(|s| 1.0 + s * c).collect::<Vec<_>>());
        let dependent = bayes_reliability(&m, &fm, t, &QuadConfig::default()).unwrap();
        prop_assert!((dependent - reliability_independent(&m, &comps, t)).abs() < 1e-12);
    }

    #[test]
    fn generated_models_round_trip(seed in any::<u64>()) {
        let model = common::model(&mut common::rng(seed), 0);
        let text = serialize_model(&model);
        prop_assert_eq!(parse_model(&text).unwrap(), model);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn parsers_never_panic_on_bytes(bytes in prop::collection::vec(any::<u8>(), 0..300)) {
        let _ = parse_model_bytes(&bytes);
        if let Ok(s) = std::str::from_utf8(&bytes) {
            let _ = parse_expr(s);
            let _ = parse_distribution(s);
            let _ = parse_law(s);
            let _ = RateExpr::parse(s);
        }
    }

    #[test]
    fn parsers_never_panic_on_near_grammar(s in "[xqu0-9(),. +*/^=minax{}\\[\\]-]{0,80}") {
        let _ = parse_expr(&s);
        let _ = RateExpr::parse(&s);
        let _ = parse_model(&format!("[system]\nname = f\nn = 3\nstructure = {s}\n[components]\n1 = exp(1)\n2 = exp(1)\n3 = exp(1)\n"));
    }

    #[test]
    fn rate_expressions_round_trip(s in "[u0-9(). +*/^-]{1,40}") {
        if let Ok(e) = RateExpr::parse(&s) {
            let back = RateExpr::parse(&e.to_string()).unwrap();
            prop_assert_eq!(back.to_string(), e.to_string());
        }
    }
}

#[test]
fn deep_nesting_is_an_error_not_a_crash() {
    let deep = format!("{}x1{}", "min(x2, ".repeat(10_000), ")".repeat(10_000));
    assert!(parse_expr(&deep).is_err());
    let rate = format!("{}u{}", "(".repeat(10_000), ")".repeat(10_000));
    assert!(RateExpr::parse(&rate).is_err());
}

#[test]
fn subset_members_round_trip() {
    for bits in 0..1u32 << 10 {
        let s = Subset(bits);
        assert_eq!(Subset::from_members(s.members()), s);
    }
}
