//! Monte Carlo estimates of `R_S(t)` and MTTF by sampling component lifetimes
//! and evaluating the system lifetime as a lattice polynomial.
//!
//! Sample `i` draws all of its uniforms from ChaCha8 stream `i` under the key
//! derived from the seed (`ChaCha8Rng::seed_from_u64(seed)`, then
//! `set_stream(i)`). Partitions cover contiguous index ranges and accumulate
//! in integers (lifetimes in fixed point with 32 fractional bits), so merged
//! estimates do not depend on how the samples are partitioned.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::apply_bounds_with;
use crate::distribution::DistributionSpec;
use crate::dsl::{Dependence, SystemModel};
use crate::error::{Error, Result};
use crate::format::sig12;
use crate::grid::TimeGrid;
use crate::lattice::LatticeExpr;

/// Default clipping level for simulated system lifetimes.
pub const DEFAULT_CAP: f64 = 1e6;

const FIXED_SHIFT: u32 = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub samples: u64,
    pub seed: u64,
    pub grid: TimeGrid,
    pub partitions: usize,
    /// Simulated lifetimes above this are clipped for the MTTF estimate.
    pub cap: f64,
}

impl SimulationConfig {
    pub fn new(samples: u64, seed: u64, grid: TimeGrid) -> Result<Self> {
        let cfg = Self {
            samples,
            seed,
            grid,
            partitions: rayon::current_num_threads().max(1),
            cap: DEFAULT_CAP,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_partitions(mut self, partitions: usize) -> Self {
        self.partitions = partitions;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Model("sample count must be at least 1".into()));
        }
        if self.partitions == 0 {
            return Err(Error::Model("partition count must be at least 1".into()));
        }
        if !(self.cap > 0.0 && self.cap.is_finite() && self.cap < 1e9) {
            return Err(Error::Model(format!("clipping cap {} outside (0, 1e9)", self.cap)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithCI {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl EstimateWithCI {
    pub fn proportion(successes: u64, samples: u64) -> Self {
        let p = successes as f64 / samples as f64;
        Self {
            estimate: p,
            stderr: (p * (1.0 - p) / samples as f64).sqrt(),
            samples,
        }
    }

    /// Whether `value` lies within `k` standard errors.
    pub fn covers(&self, value: f64, k: f64) -> bool {
        (value - self.estimate).abs() <= k * self.stderr
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub seed: u64,
    pub samples: u64,
    pub curve: Vec<(f64, EstimateWithCI)>,
    pub mttf: EstimateWithCI,
    /// Samples whose lifetime exceeded the cap.
    pub clipped: u64,
}

impl SimulationResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,estimate,stderr\n");
        for (t, e) in &self.curve {
            out.push_str(&format!("{},{},{}\n", sig12(*t), sig12(e.estimate), sig12(e.stderr)));
        }
        out
    }
}

/// Random stream of sample `index` under `seed`.
pub fn sample_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform on `[0, 1)` with 53 random bits.
fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

enum Recipe {
    Independent(Vec<DistributionSpec>),
    Bayes(crate::dependence::FactorModel),
    PrePhase(crate::dependence::PrePhaseModel),
}

/// Draws lifetime vectors for a model and maps them to system lifetimes.
pub struct Sampler {
    expr: LatticeExpr,
    units: usize,
    recipe: Recipe,
}

impl Sampler {
    pub fn new(model: &SystemModel) -> Result<Self> {
        model.set_function()?.require_semicoherent()?;
        let expr = model.expr()?;
        Ok(match &model.dependence {
            Dependence::Independent => Self {
                expr,
                units: model.n,
                recipe: Recipe::Independent(model.components.clone()),
            },
            Dependence::Bayes(fm) => Self {
                expr,
                units: model.n,
                recipe: Recipe::Bayes(fm.clone()),
            },
            Dependence::PrePhase(pm) => Self {
                expr,
                units: model.n,
                recipe: Recipe::PrePhase(pm.clone()),
            },
            Dependence::Bounds(b) => {
                let aug = apply_bounds_with(&expr, model.n, &b.bounds, &b.interactions)?;
                let mut laws = model.components.clone();
                laws.extend(aug.bound_lifetimes());
                Self {
                    expr: aug.resolved_expr(),
                    units: aug.units(),
                    recipe: Recipe::Independent(laws),
                }
            }
        })
    }

    /// Number of sampled units (components plus bounds).
    pub fn units(&self) -> usize {
        self.units
    }

    /// System lifetime as an expression over all sampled units.
    pub fn expr(&self) -> &LatticeExpr {
        &self.expr
    }

    /// Unit lifetimes of sample `index`.
    pub fn lifetimes(&self, seed: u64, index: u64) -> Result<Vec<f64>> {
        let mut rng = sample_stream(seed, index);
        let bad = |e: Error| Error::Sampling {
            draw: index,
            message: e.to_string(),
        };
        Ok(match &self.recipe {
            Recipe::Independent(laws) => laws.iter().map(|d| d.quantile(uniform(&mut rng))).collect(),
            Recipe::Bayes(fm) => {
                let u: Vec<f64> = fm.factors().iter().map(|g| g.quantile(uniform(&mut rng))).collect();
                let mut out = Vec::with_capacity(fm.n());
                for law in fm.laws() {
                    out.push(law.instantiate(&u).map_err(bad)?.quantile(uniform(&mut rng)));
                }
                out
            }
            Recipe::PrePhase(pm) => {
                let u0 = pm.prephase().quantile(uniform(&mut rng));
                let mut out = Vec::with_capacity(pm.n());
                for law in pm.decay() {
                    out.push(u0 + law.instantiate(&[u0]).map_err(bad)?.quantile(uniform(&mut rng)));
                }
                out
            }
        })
    }

    /// System lifetime of sample `index`.
    pub fn system_lifetime(&self, seed: u64, index: u64) -> Result<f64> {
        self.expr.eval(&self.lifetimes(seed, index)?)
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    alive: Vec<u64>,
    sum: i128,
    sum_sq: i128,
    clipped: u64,
}

impl Tally {
    fn merge(mut self, other: &Tally) -> Tally {
        for (a, b) in self.alive.iter_mut().zip(&other.alive) {
            *a += b;
        }
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.clipped += other.clipped;
        self
    }
}

fn run_partition(sampler: &Sampler, cfg: &SimulationConfig, range: std::ops::Range<u64>) -> Result<Tally> {
    let grid = cfg.grid.points();
    let mut tally = Tally {
        alive: vec![0; grid.len()],
        ..Tally::default()
    };
    let scale = (1u64 << FIXED_SHIFT) as f64;
    for index in range {
        let t = sampler.system_lifetime(cfg.seed, index)?;
        if t.is_nan() {
            return Err(Error::Sampling {
                draw: index,
                message: "system lifetime is NaN".into(),
            });
        }
        for (k, &g) in grid.iter().enumerate() {
            if t > g {
                tally.alive[k] += 1;
            }
        }
        let clipped = if t > cfg.cap {
            tally.clipped += 1;
            cfg.cap
        } else {
            t
        };
        let q = (clipped * scale).round() as i128;
        tally.sum += q;
        tally.sum_sq += (q * q) >> FIXED_SHIFT;
    }
    Ok(tally)
}

/// Estimates `R_S` on the grid and the (clipped) MTTF.
pub fn simulate(model: &SystemModel, cfg: &SimulationConfig) -> Result<SimulationResult> {
    cfg.validate()?;
    let sampler = Sampler::new(model)?;
    let n = cfg.samples;
    let parts = (cfg.partitions as u64).min(n);
    let tallies: Vec<Result<Tally>> = (0..parts)
        .into_par_iter()
        .map(|p| run_partition(&sampler, cfg, p * n / parts..(p + 1) * n / parts))
        .collect();
    let mut total = Tally {
        alive: vec![0; cfg.grid.len()],
        ..Tally::default()
    };
    for t in tallies {
        total = total.merge(&t?);
    }
    let scale = (1u64 << FIXED_SHIFT) as f64;
    let mean = total.sum as f64 / scale / n as f64;
    let mean_sq = total.sum_sq as f64 / scale / n as f64;
    let var = if n > 1 {
        ((mean_sq - mean * mean) * n as f64 / (n - 1) as f64).max(0.0)
    } else {
        0.0
    };
    Ok(SimulationResult {
        seed: cfg.seed,
        samples: n,
        curve: cfg
            .grid
            .points()
            .iter()
            .zip(&total.alive)
            .map(|(&t, &a)| (t, EstimateWithCI::proportion(a, n)))
            .collect(),
        mttf: EstimateWithCI {
            estimate: mean,
            stderr: (var / n as f64).sqrt(),
            samples: n,
        },
        clipped: total.clipped,
    })
}
