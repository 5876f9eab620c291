//! Acceptance criteria, one line of output each. Exits nonzero if any fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;

use latrel::bounds::{
    apply_bounds, bounded_reliability_independent, constant_bounds_weighted, weighted_reliability, BoundKind, BoundSpec,
};
use latrel::dependence::{prephase_reliability, prephase_uniform_exponential_closed, ConditionalLaw, PrePhaseModel};
use latrel::dsl::{parse_expr, parse_model_bytes, RateExpr};
use latrel::engine::{
    mttf, mttf_exponential_closed, mttf_exponential_exact, reliability_from_states, reliability_general,
    reliability_independent, reliability_symmetric, IndependentOracle, Side,
};
use latrel::lattice::{symmetric_mobius, NormalForm, StructureForm, StructureForms};
use latrel::montecarlo::{simulate, SimulationConfig};
use latrel::{
    parse_model, serialize_model, Analysis, DistributionSpec, LatticeExpr, MobiusVector, QuadConfig, SetFunction,
    Subset, TimeGrid,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn cfg(tol: f64) -> QuadConfig {
    QuadConfig {
        abs_tol: tol,
        ..QuadConfig::default()
    }
}

fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    TimeGrid::linear(a, b, count).unwrap().points().to_vec()
}

fn transform_round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(1);
    for n in 1..=12 {
        for _ in 0..1000 {
            let v = common::any_set_function(&mut rng, n);
            let back = MobiusVector::of(&v).zeta().map_err(|e| e.to_string())?;
            ensure(back == v, || format!("round trip differs for n = {n}"))?;
        }
    }
    within_time(start, Duration::from_secs(10))?;
    Ok(format!("12000 set functions in {:.2?}", start.elapsed()))
}

fn six_forms() -> Outcome {
    let mut rng = common::rng(2);
    for n in 2..=8 {
        for _ in 0..200 {
            let v = common::semicoherent(&mut rng, n);
            let forms = StructureForms::new(&v);
            for a in Subset::full(n).subsets() {
                let x: Vec<bool> = (1..=n).map(|i| a.contains(i)).collect();
                for form in StructureForm::ALL {
                    ensure(forms.eval_binary(&x, form) == v.value(a), || {
                        format!("{form} disagrees at {a} for n = {n}")
                    })?;
                }
            }
        }
    }
    Ok("1400 systems, all binary inputs".into())
}

fn expansions_agree() -> Outcome {
    let mut rng = common::rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rand::Rng::random_range(&mut rng, 1..=8);
        let v = common::semicoherent(&mut rng, n);
        let comps = common::exponentials(&common::rates(&mut rng, n, 0.1, 10.0));
        let oracle = IndependentOracle::new(comps.clone());
        let forms = StructureForms::new(&v);
        for t in linspace(0.0, 3.0, 20) {
            let poly = reliability_independent(forms.mobius(), &comps, t);
            let others = [
                reliability_from_states(&v, &oracle, t, Side::Primal),
                reliability_from_states(&v, &oracle, t, Side::Dual),
                reliability_general(&forms, &oracle, t, Side::Primal),
                reliability_general(&forms, &oracle, t, Side::Dual),
            ];
            for r in others {
                let d = (r.map_err(|e| e.to_string())? - poly).abs();
                worst = worst.max(d);
            }
        }
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.1e}"))
}

fn closed_form_mttf() -> Outcome {
    let mut rng = common::rng(4);
    let quad = cfg(1e-10);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rand::Rng::random_range(&mut rng, 1..=8);
        let v = common::semicoherent(&mut rng, n);
        let m = MobiusVector::of(&v);
        let rates = common::rates(&mut rng, n, 0.1, 10.0);
        let comps = common::exponentials(&rates);
        let closed = mttf_exponential_closed(&m, &rates).value;
        let numeric = mttf(|t| reliability_independent(&m, &comps, t), &[], &quad);
        worst = worst.max((closed - numeric.value).abs());
    }
    ensure(worst <= 1e-6, || format!("max |closed - quadrature| {worst:e}"))?;

    let bridge = parse_expr("max(min(x1, x4), min(x2, x5), min(x1, x3, x5), min(x2, x3, x4))").unwrap();
    let m = MobiusVector::of(&bridge.to_set_function(5).unwrap());
    let one = BigRational::from_integer(BigInt::from(1));
    let exact = mttf_exponential_exact(&m, &vec![one; 5]).unwrap();
    let r = |p: i64, q: i64| BigRational::new(BigInt::from(p), BigInt::from(q));
    let expected = r(2, 2) + r(2, 3) - r(5, 4) + r(2, 5);
    ensure(exact == expected, || format!("bridge MTTF {exact}, expected {expected}"))?;
    Ok(format!("max deviation {worst:.1e}; bridge MTTF = {exact} exactly"))
}

fn bridge_mobius() -> Outcome {
    let bridge = parse_expr("max(min(x1, x4), min(x2, x5), min(x1, x3, x5), min(x2, x3, x4))").unwrap();
    let v = bridge.to_set_function(5).unwrap();
    let fast = MobiusVector::of(&v);
    for a in Subset::full(5).subsets() {
        let direct: i64 = a
            .subsets()
            .map(|b| {
                let sign = if (a.len() - b.len()) % 2 == 0 { 1 } else { -1 };
                sign * i64::from(v.value(b))
            })
            .sum();
        ensure(direct == fast.coeff(a), || format!("coefficient of {a}: {} vs {direct}", fast.coeff(a)))?;
    }
    let sums = fast.cardinality_sums();
    ensure(sums == [0, 0, 2, 2, -5, 2], || format!("cardinality sums {sums:?}"))?;
    Ok(format!("cardinality sums {sums:?}"))
}

const BAYES_SERIES: &str =
    "[system]\nname = b\nn = 2\nstructure = min(x1, x2)\n[dependence]\nkind = bayes\ng = uniform(0, 1)\nrate.1 = 1 + u\nrate.2 = 1 + u\n";

fn bayes_dependence() -> Outcome {
    let a = Analysis::new(&parse_model(BAYES_SERIES).unwrap(), cfg(1e-11)).map_err(|e| e.to_string())?;
    let mttf = a.mttf().map_err(|e| e.to_string())?.value;
    let target = 2f64.ln() / 2.0;
    ensure((mttf - target).abs() <= 1e-8, || format!("MTTF {mttf} vs {target}"))?;
    let r = a.reliability(0.5).map_err(|e| e.to_string())?;
    let e1 = (-1f64).exp();
    let expected = e1 * (1.0 - e1);
    ensure((r - expected).abs() <= 1e-8, || format!("R(0.5) = {r} vs {expected}"))?;
    Ok(format!("MTTF err {:.1e}, R(0.5) err {:.1e}", (mttf - target).abs(), (r - expected).abs()))
}

fn prephase_closed_form() -> Outcome {
    let (a, b) = (1.0, 2.5);
    let rates = [0.7, 1.3, 2.0];
    let v = parse_expr("max(min(x1, x2), x3)").unwrap().to_set_function(3).unwrap();
    let m = MobiusVector::of(&v);
    let g = DistributionSpec::uniform(a, b).unwrap();
    let laws = rates
        .iter()
        .map(|&r| ConditionalLaw::exponential(RateExpr::parse(&format!("{r} + 0 * u")).unwrap()))
        .collect();
    let pm = PrePhaseModel::new(g, laws).map_err(|e| e.to_string())?;
    let quad = cfg(1e-11);
    let mut worst: f64 = 0.0;
    let mut branches = [0usize; 3];
    for t in linspace(0.0, 4.0, 100) {
        let closed = prephase_uniform_exponential_closed(&m, a, b, &rates, t);
        let general = prephase_reliability(&m, &pm, t, &quad).map_err(|e| e.to_string())?;
        worst = worst.max((closed - general).abs());
        branches[if t < a { 0 } else if t <= b { 1 } else { 2 }] += 1;
        if t < a {
            ensure(closed == 1.0, || format!("closed form at t = {t} is {closed}, not 1"))?;
        }
    }
    ensure(branches.iter().all(|&c| c > 0), || format!("grid misses a branch: {branches:?}"))?;
    ensure(worst <= 1e-7, || format!("max deviation {worst:e}"))?;

    let text = "[system]\nname = p\nn = 2\nstructure = min(x1, x2)\n[dependence]\nkind = prephase\nG = uniform(1, 2)\nrate.1 = 1\nrate.2 = 1\n";
    let series = Analysis::new(&parse_model(text).unwrap(), quad).map_err(|e| e.to_string())?;
    let value = series.mttf().map_err(|e| e.to_string())?.value;
    ensure((value - 2.0).abs() <= 1e-8, || format!("series MTTF {value}"))?;
    Ok(format!("max deviation {worst:.1e}, branches {branches:?}, series MTTF {value}"))
}

fn bounds() -> Outcome {
    let text = std::fs::read_to_string(models_dir().join("shared_upper_bound.model")).unwrap();
    let shared = Analysis::new(&parse_model(&text).unwrap(), cfg(1e-12)).map_err(|e| e.to_string())?;
    ensure(shared.method() == "augmented-mobius", || shared.method().to_string())?;
    for t in linspace(0.0, 5.0, 51) {
        let r = shared.reliability(t).map_err(|e| e.to_string())?;
        ensure((r - (-3.0 * t).exp()).abs() <= 1e-12, || format!("R({t}) = {r}"))?;
    }

    let mut rng = common::rng(8);
    for _ in 0..200 {
        let n = rand::Rng::random_range(&mut rng, 1..=7);
        let m = rand::Rng::random_range(&mut rng, 1..=(10 - n).min(3));
        let v = common::semicoherent(&mut rng, n);
        let expr = LatticeExpr::from_set_function(&v, NormalForm::Disjunctive).unwrap();
        let specs: Vec<BoundSpec> = (1..=m)
            .map(|id| {
                let kind = if rand::Rng::random_bool(&mut rng, 0.5) {
                    BoundKind::Upper
                } else {
                    BoundKind::Lower
                };
                let scope = common::nonempty_subset(&mut rng, n);
                BoundSpec::new(id, kind, scope, DistributionSpec::exponential(1.0).unwrap()).unwrap()
            })
            .collect();
        let aug = apply_bounds(&expr, n, &specs).map_err(|e| e.to_string())?;
        let projected = aug.projection().map_err(|e| e.to_string())?;
        ensure(projected == v, || format!("projection differs for {expr} with {specs:?}"))?;
    }

    let mut checked = 0;
    for seed in 0..20u64 {
        let mut rng = common::rng(800 + seed);
        let n = rand::Rng::random_range(&mut rng, 1..=5);
        let v = common::semicoherent(&mut rng, n);
        let expr = LatticeExpr::from_set_function(&v, NormalForm::Conjunctive).unwrap();
        let comps: Vec<_> = (0..n).map(|_| common::distribution(&mut rng)).collect();
        let specs: Vec<BoundSpec> = (1..=2)
            .map(|id| {
                let kind = if id == 1 { BoundKind::Upper } else { BoundKind::Lower };
                let c = rand::Rng::random_range(&mut rng, 0.2..3.0);
                let scope = common::nonempty_subset(&mut rng, n);
                BoundSpec::new(id, kind, scope, DistributionSpec::deterministic(c).unwrap()).unwrap()
            })
            .collect();
        let weighted = constant_bounds_weighted(&expr, n, &specs).map_err(|e| e.to_string())?;
        let aug = apply_bounds(&expr, n, &specs).map_err(|e| e.to_string())?;
        for t in linspace(0.0, 4.0, 41) {
            let a = weighted_reliability(&weighted, &comps, t).map_err(|e| e.to_string())?;
            let b = bounded_reliability_independent(&aug, &comps, t).map_err(|e| e.to_string())?;
            ensure((a - b).abs() <= 1e-12, || format!("{weighted} at t = {t}: {a} vs {b}"))?;
            checked += 1;
        }
    }
    Ok(format!("e^(-3t) to 1e-12, 200 projections, {checked} constant-bound points"))
}

fn models_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/models"))
}

fn monte_carlo() -> Outcome {
    let start = Instant::now();
    let grid = TimeGrid::new(vec![0.25, 0.5, 1.0, 1.5, 2.0, 3.0]).unwrap();
    let mut entries: Vec<_> = std::fs::read_dir(models_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    entries.sort();
    let mut checks = 0;
    let mut worst: f64 = 0.0;
    for path in &entries {
        let model = parse_model(&std::fs::read_to_string(path).unwrap()).map_err(|e| e.to_string())?;
        let name = path.file_name().unwrap().to_string_lossy();
        let exact = Analysis::new(&model, cfg(1e-10)).map_err(|e| e.to_string())?;
        let sim_cfg = SimulationConfig::new(1_000_000, 20261016, grid.clone()).map_err(|e| e.to_string())?;
        let sim = simulate(&model, &sim_cfg).map_err(|e| e.to_string())?;
        for (t, est) in &sim.curve {
            let r = exact.reliability(*t).map_err(|e| e.to_string())?;
            ensure(est.covers(r, 3.0), || {
                format!("{name}: R({t}) = {r}, estimate {} ± {}", est.estimate, est.stderr)
            })?;
            if est.stderr > 0.0 {
                worst = worst.max((r - est.estimate).abs() / est.stderr);
            }
            checks += 1;
        }
        let m = exact.mttf().map_err(|e| e.to_string())?.value;
        ensure(sim.mttf.covers(m, 3.0), || {
            format!("{name}: MTTF {m}, estimate {} ± {}", sim.mttf.estimate, sim.mttf.stderr)
        })?;
        worst = worst.max((m - sim.mttf.estimate).abs() / sim.mttf.stderr);
        checks += 1;
    }
    within_time(start, Duration::from_secs(60))?;
    Ok(format!(
        "{} models, {checks} values, worst {worst:.2} standard errors, {:.1?}",
        entries.len(),
        start.elapsed()
    ))
}

fn parser_robustness() -> Outcome {
    let mut rng = common::rng(10);
    let seeds: Vec<Vec<u8>> = std::fs::read_dir(models_dir())
        .unwrap()
        .map(|e| std::fs::read(e.unwrap().path()).unwrap())
        .collect();
    let mut rejected = 0;
    for k in 0..20_000 {
        let bytes: Vec<u8> = if k % 2 == 0 {
            let len = rand::Rng::random_range(&mut rng, 0..200);
            (0..len).map(|_| rand::Rng::random::<u8>(&mut rng)).collect()
        } else {
            let mut b = seeds[k % seeds.len()].clone();
            for _ in 0..rand::Rng::random_range(&mut rng, 1..6) {
                let i = rand::Rng::random_range(&mut rng, 0..b.len());
                match rand::Rng::random_range(&mut rng, 0..3) {
                    0 => b[i] = rand::Rng::random(&mut rng),
                    1 => {
                        b.remove(i);
                    }
                    _ => b.insert(i, b"(){},=.-x1q\n"[rand::Rng::random_range(&mut rng, 0..12)]),
                }
            }
            b
        };
        let outcome = panic::catch_unwind(|| {
            let e = std::str::from_utf8(&bytes).map(|s| parse_expr(s).is_err());
            (e, parse_model_bytes(&bytes).is_err())
        });
        match outcome {
            Ok((_, model_err)) => rejected += usize::from(model_err),
            Err(_) => return Err(format!("parser panicked on {:?}", String::from_utf8_lossy(&bytes))),
        }
    }
    let mut rng = common::rng(11);
    for k in 0..1000 {
        let model = common::model(&mut rng, k);
        let text = serialize_model(&model);
        let back = parse_model(&text).map_err(|e| format!("{e} in\n{text}"))?;
        ensure(back == model, || format!("round trip changed\n{text}"))?;
    }
    Ok(format!("20000 fuzz inputs ({rejected} rejected models), 1000 round trips"))
}

fn symmetric_k_out_of_n() -> Outcome {
    let mut rng = common::rng(12);
    let mut worst: f64 = 0.0;
    for n in 1..=8 {
        for k in 1..=n {
            let v = SetFunction::k_out_of_n(k, n).unwrap();
            let m = MobiusVector::of(&v);
            let mbar = symmetric_mobius(&m);
            let rate = rand::Rng::random_range(&mut rng, 0.1..5.0);
            let comps = common::exponentials(&vec![rate; n]);
            for t in linspace(0.0, 3.0, 20) {
                let sym = reliability_symmetric(&mbar, |j| (-(j as f64) * rate * t).exp());
                worst = worst.max((sym - reliability_independent(&m, &comps, t)).abs());
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("transform round trip", transform_round_trip),
        ("six-form equivalence", six_forms),
        ("five reliability computations agree", expansions_agree),
        ("closed-form MTTF", closed_form_mttf),
        ("bridge Möbius coefficients", bridge_mobius),
        ("factor dependence", bayes_dependence),
        ("pre-phase closed form", prephase_closed_form),
        ("bounds", bounds),
        ("Monte Carlo concordance", monte_carlo),
        ("parser robustness", parser_robustness),
        ("k-out-of-n symmetric reliability", symmetric_k_out_of_n),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:2} PASS  {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:2} FAIL  {name}: {why}", k + 1);
            }
        }
    }
    let _ = panic::take_hook();
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
