use std::str::FromStr;

use crate::error::{Error, Result};

/// A strictly increasing set of evaluation times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid(Vec<f64>);

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Model("time grid is empty".into()));
        }
        if points.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::Model("grid times must be finite and >= 0".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Model("grid must be strictly increasing".into()));
        }
        Ok(Self(points))
    }

    /// `count` evenly spaced points from `start` to `stop` inclusive.
    pub fn linear(start: f64, stop: f64, count: usize) -> Result<Self> {
        match count {
            0 => Err(Error::Model("grid needs at least one point".into())),
            1 => Self::new(vec![start]),
            _ => {
                let step = (stop - start) / (count - 1) as f64;
                Self::new((0..count).map(|k| start + step * k as f64).collect())
            }
        }
    }

    /// `count` geometrically spaced points; `start` must be positive.
    pub fn log(start: f64, stop: f64, count: usize) -> Result<Self> {
        if start <= 0.0 {
            return Err(Error::Model("log grid needs start > 0".into()));
        }
        match count {
            0 => Err(Error::Model("grid needs at least one point".into())),
            1 => Self::new(vec![start]),
            _ => {
                let ratio = (stop / start).ln() / (count - 1) as f64;
                Self::new((0..count).map(|k| start * (ratio * k as f64).exp()).collect())
            }
        }
    }

    /// Parses `start:stop:count`.
    pub fn parse(spec: &str, log: bool) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
        let bad = || Error::Model(format!("grid spec '{spec}' is not start:stop:count"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let start = f64::from_str(parts[0]).map_err(|_| bad())?;
        let stop = f64::from_str(parts[1]).map_err(|_| bad())?;
        let count = usize::from_str(parts[2]).map_err(|_| bad())?;
        if log {
            Self::log(start, stop, count)
        } else {
            Self::linear(start, stop, count)
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
