//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Finite intervals use global adaptive bisection. Integrals over `[0, ∞)`
//! of nonincreasing integrands (survival curves) are handled by doubling the
//! horizon until the integrand bound times the horizon drops below the
//! tolerance; a horizon beyond the configured cap is reported as divergence.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::Result;

/// Environment variable overriding [`QuadConfig::default`]'s absolute tolerance.
pub const TOLERANCE_ENV: &str = "LATREL_TOL";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    /// Absolute tolerance per finite panel.
    pub abs_tol: f64,
    /// Maximum number of subintervals per panel.
    pub max_intervals: usize,
    /// Largest horizon tried for `[0, ∞)` integrals.
    pub horizon_cap: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            max_intervals: 2000,
            horizon_cap: 1e6,
        }
    }
}

impl QuadConfig {
    /// Defaults, with `abs_tol` taken from `LATREL_TOL` when it holds a positive number.
    pub fn from_env() -> Self {
        let mut cfg = Self::default();
        if let Some(tol) = std::env::var(TOLERANCE_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|t| t.is_finite() && *t > 0.0)
        {
            cfg.abs_tol = tol;
        }
        cfg
    }

    /// Same limits with a tolerance `factor` times tighter.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol / factor,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub converged: bool,
}

/// Value of an integral that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralEstimate {
    /// `+∞` when `diverged` is set.
    pub value: f64,
    pub abs_error: f64,
    pub diverged: bool,
}

impl IntegralEstimate {
    pub fn exact(value: f64) -> Self {
        if value.is_finite() {
            Self {
                value,
                abs_error: 0.0,
                diverged: false,
            }
        } else {
            Self::divergent()
        }
    }

    pub fn divergent() -> Self {
        Self {
            value: f64::INFINITY,
            abs_error: f64::INFINITY,
            diverged: true,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

type Integrand<'a> = dyn FnMut(f64) -> Result<f64> + 'a;

/// One 15-point Kronrod panel with the QUADPACK error heuristic.
fn gk15(f: &mut Integrand<'_>, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((result, err))
}

#[derive(Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn adaptive(f: &mut Integrand<'_>, a: f64, b: f64, tol: f64, max_intervals: usize) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            converged: true,
        });
    }
    let (value, err) = gk15(f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, err });
    let mut total = value;
    let mut total_err = err;
    while total_err > tol && heap.len() < max_intervals {
        if !total.is_finite() {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval below floating-point resolution
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(f, worst.a, mid)?;
        let (v2, e2) = gk15(f, mid, worst.b)?;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });
    }
    // re-sum to shed accumulated drift
    let (value, abs_error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err));
    Ok(QuadResult {
        value,
        abs_error,
        converged: abs_error <= tol && value.is_finite(),
    })
}

fn split_points(a: f64, b: f64, breakpoints: &[f64]) -> Vec<f64> {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    pts.extend(inner);
    pts.push(b);
    pts
}

/// `∫_a^b f` for a fallible integrand, with mandatory panel boundaries at `breakpoints`.
pub fn try_integrate(
    mut f: impl FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    let pts = split_points(a, b, breakpoints);
    let mut out = QuadResult {
        value: 0.0,
        abs_error: 0.0,
        converged: true,
    };
    for w in pts.windows(2) {
        let r = adaptive(&mut f, w[0], w[1], cfg.abs_tol, cfg.max_intervals)?;
        out.value += r.value;
        out.abs_error += r.abs_error;
        out.converged &= r.converged;
    }
    Ok(out)
}

/// `∫_a^b f` with mandatory panel boundaries at `breakpoints`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, breakpoints: &[f64], cfg: &QuadConfig) -> QuadResult {
    try_integrate(|x| Ok(f(x)), a, b, breakpoints, cfg).expect("infallible integrand")
}

/// `∫_a^∞ f` for a general integrand, through the map `u = a + x / (1 - x)`.
pub fn try_integrate_to_infinity(
    mut f: impl FnMut(f64) -> Result<f64>,
    a: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    let mut g = |x: f64| -> Result<f64> {
        let one_minus = 1.0 - x;
        let u = a + x / one_minus;
        if !u.is_finite() {
            return Ok(0.0);
        }
        Ok(f(u)? / (one_minus * one_minus))
    };
    adaptive(&mut g, 0.0, 1.0, cfg.abs_tol, cfg.max_intervals)
}

/// `∫_0^∞ f` for a nonincreasing, nonnegative integrand.
///
/// Panels `[0, h], [h, 2h], ...` are integrated to `abs_tol` each; the loop stops
/// once `f(H) · H <= abs_tol` at the current horizon `H` (the tail is then
/// negligible for any integrand decaying at least like `1/t²`), and reports
/// divergence if `H` would exceed `horizon_cap`.
pub fn try_integrate_survival(
    mut f: impl FnMut(f64) -> Result<f64>,
    breakpoints: &[f64],
    cfg: &QuadConfig,
) -> Result<IntegralEstimate> {
    let last_break = breakpoints
        .iter()
        .copied()
        .filter(|x| x.is_finite())
        .fold(0.0f64, f64::max);
    let mut lo = 0.0;
    let mut hi = 1.0f64.max(last_break);
    let mut value = 0.0;
    let mut abs_error = 0.0;
    loop {
        let r = try_integrate(&mut f, lo, hi, breakpoints, cfg)?;
        if !r.converged {
            return Ok(IntegralEstimate::divergent());
        }
        value += r.value;
        abs_error += r.abs_error;
        let bound = f(hi)?;
        if bound == 0.0 || bound * hi <= cfg.abs_tol {
            abs_error += bound * hi;
            return Ok(IntegralEstimate {
                value,
                abs_error,
                diverged: false,
            });
        }
        if hi >= cfg.horizon_cap {
            return Ok(IntegralEstimate::divergent());
        }
        lo = hi;
        hi = (2.0 * hi).min(cfg.horizon_cap);
    }
}

pub fn integrate_survival(f: impl Fn(f64) -> f64, breakpoints: &[f64], cfg: &QuadConfig) -> IntegralEstimate {
    try_integrate_survival(|x| Ok(f(x)), breakpoints, cfg).expect("infallible integrand")
}
