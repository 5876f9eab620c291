//! Parametric lifetime laws on `[0, +∞)`.

use std::fmt;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec {
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
    Weibull { shape: f64, scale: f64 },
    /// Point mass at `value`.
    Deterministic { value: f64 },
}

fn finite_positive(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Distribution(format!("{what} must be finite and > 0, got {x}")))
    }
}

impl DistributionSpec {
    pub fn exponential(rate: f64) -> Result<Self> {
        finite_positive(rate, "exponential rate")?;
        Ok(Self::Exponential { rate })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
            return Err(Error::Distribution(format!(
                "uniform needs 0 <= a < b, got ({lo}, {hi})"
            )));
        }
        Ok(Self::Uniform { lo, hi })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        finite_positive(shape, "weibull shape")?;
        finite_positive(scale, "weibull scale")?;
        Ok(Self::Weibull { shape, scale })
    }

    pub fn deterministic(value: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::Distribution(format!(
                "constant lifetime must be finite and >= 0, got {value}"
            )));
        }
        Ok(Self::Deterministic { value })
    }

    /// Re-runs the constructor checks (for values built through the enum directly).
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Exponential { rate } => Self::exponential(rate).map(drop),
            Self::Uniform { lo, hi } => Self::uniform(lo, hi).map(drop),
            Self::Weibull { shape, scale } => Self::weibull(shape, scale).map(drop),
            Self::Deterministic { value } => Self::deterministic(value).map(drop),
        }
    }

    /// `R(t) = Pr(T > t)`.
    pub fn survival(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 1.0;
        }
        match *self {
            Self::Exponential { rate } => (-rate * t).exp(),
            Self::Uniform { lo, hi } => {
                if t <= lo {
                    1.0
                } else if t >= hi {
                    0.0
                } else {
                    (hi - t) / (hi - lo)
                }
            }
            Self::Weibull { shape, scale } => (-(t / scale).powf(shape)).exp(),
            Self::Deterministic { value } => {
                if t < value {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `F(t) = Pr(T <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        match *self {
            Self::Exponential { rate } if t >= 0.0 => -(-rate * t).exp_m1(),
            Self::Weibull { shape, scale } if t >= 0.0 => -(-(t / scale).powf(shape)).exp_m1(),
            _ => 1.0 - self.survival(t),
        }
    }

    /// Lebesgue density; `None` for the point mass.
    pub fn density(&self, t: f64) -> Option<f64> {
        if t < 0.0 {
            return Some(0.0);
        }
        match *self {
            Self::Exponential { rate } => Some(rate * (-rate * t).exp()),
            Self::Uniform { lo, hi } => Some(if t >= lo && t <= hi { 1.0 / (hi - lo) } else { 0.0 }),
            Self::Weibull { shape, scale } => {
                if t == 0.0 {
                    return Some(match shape {
                        k if k < 1.0 => f64::INFINITY,
                        k if k == 1.0 => 1.0 / scale,
                        _ => 0.0,
                    });
                }
                let z = t / scale;
                Some(shape / scale * z.powf(shape - 1.0) * (-z.powf(shape)).exp())
            }
            Self::Deterministic { .. } => None,
        }
    }

    /// Inverse cdf at `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => -(-u).ln_1p() / rate,
            Self::Uniform { lo, hi } => lo + (hi - lo) * u,
            Self::Weibull { shape, scale } => scale * (-(-u).ln_1p()).powf(1.0 / shape),
            Self::Deterministic { value } => value,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Uniform { lo, hi } => 0.5 * (lo + hi),
            Self::Weibull { shape, scale } => scale * gamma(1.0 + 1.0 / shape),
            Self::Deterministic { value } => value,
        }
    }

    /// Essential infimum of the support.
    pub fn support_min(&self) -> f64 {
        match *self {
            Self::Uniform { lo, .. } => lo,
            Self::Deterministic { value } => value,
            _ => 0.0,
        }
    }

    /// Essential supremum of the support.
    pub fn support_max(&self) -> f64 {
        match *self {
            Self::Uniform { hi, .. } => hi,
            Self::Deterministic { value } => value,
            _ => f64::INFINITY,
        }
    }

    /// Points where the survival function jumps or has a kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Self::Uniform { lo, hi } => vec![lo, hi],
            Self::Deterministic { value } => vec![value],
            _ => Vec::new(),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, Self::Deterministic { .. })
    }

    pub fn rate(&self) -> Option<f64> {
        match *self {
            Self::Exponential { rate } => Some(rate),
            _ => None,
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exponential { rate } => write!(f, "exp({rate})"),
            Self::Uniform { lo, hi } => write!(f, "uniform({lo}, {hi})"),
            Self::Weibull { shape, scale } => write!(f, "weibull({shape}, {scale})"),
            Self::Deterministic { value } => write!(f, "const({value})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survival_boundaries() {
        let laws = [
            DistributionSpec::exponential(2.0).unwrap(),
            DistributionSpec::uniform(1.0, 3.0).unwrap(),
            DistributionSpec::weibull(1.5, 2.0).unwrap(),
            DistributionSpec::deterministic(0.7).unwrap(),
        ];
        for d in laws {
            assert_eq!(d.survival(0.0), 1.0, "{d}");
            assert!(d.survival(1e6) < 1e-12, "{d}");
            let mut prev = 1.0;
            for k in 0..200 {
                let s = d.survival(k as f64 * 0.05);
                assert!(s <= prev);
                prev = s;
            }
        }
    }

    #[test]
    fn deterministic_is_a_step() {
        let d = DistributionSpec::deterministic(2.0).unwrap();
        assert_eq!(d.survival(1.999), 1.0);
        assert_eq!(d.survival(2.0), 0.0);
        assert_eq!(d.density(1.0), None);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let laws = [
            DistributionSpec::exponential(0.3).unwrap(),
            DistributionSpec::uniform(0.5, 4.0).unwrap(),
            DistributionSpec::weibull(0.7, 1.3).unwrap(),
        ];
        for d in laws {
            for u in [0.01, 0.3, 0.5, 0.9, 0.999] {
                assert!((d.cdf(d.quantile(u)) - u).abs() < 1e-12, "{d} at {u}");
            }
        }
    }

    #[test]
    fn means() {
        assert!((DistributionSpec::weibull(1.0, 2.0).unwrap().mean() - 2.0).abs() < 1e-12);
        assert!((DistributionSpec::weibull(2.0, 1.0).unwrap().mean() - 0.886226925452758).abs() < 1e-12);
        assert_eq!(DistributionSpec::uniform(1.0, 2.0).unwrap().mean(), 1.5);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DistributionSpec::exponential(0.0).is_err());
        assert!(DistributionSpec::uniform(2.0, 1.0).is_err());
        assert!(DistributionSpec::uniform(-1.0, 1.0).is_err());
        assert!(DistributionSpec::weibull(1.0, f64::NAN).is_err());
        assert!(DistributionSpec::deterministic(-0.1).is_err());
    }
}
