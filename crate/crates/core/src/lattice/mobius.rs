//! Möbius and zeta transforms on the subset lattice.
//!
//! Both are computed in place with the standard one-coordinate-at-a-time
//! sweep, `n · 2^(n-1)` additions in total.

use crate::error::{Error, Result};

use super::setfn::SetFunction;
use super::subset::Subset;

/// The Möbius transform `m_v`, so that `v(A) = Σ_{B ⊆ A} m_v(B)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MobiusVector {
    n: usize,
    coeffs: Vec<i64>,
}

/// `x[A] <- Σ_{B ⊆ A} x[B]`.
pub fn subset_sums(xs: &mut [i64]) {
    debug_assert!(xs.len().is_power_of_two());
    let mut step = 1;
    while step < xs.len() {
        for block in xs.chunks_exact_mut(2 * step) {
            let (lo, hi) = block.split_at_mut(step);
            for (l, h) in lo.iter().zip(hi.iter_mut()) {
                *h += *l;
            }
        }
        step <<= 1;
    }
}

/// Inverse of [`subset_sums`].
pub fn inverse_subset_sums(xs: &mut [i64]) {
    debug_assert!(xs.len().is_power_of_two());
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

impl MobiusVector {
    pub fn from_coeffs(n: usize, coeffs: Vec<i64>) -> Result<Self> {
        super::setfn::check_units(n)?;
        if coeffs.len() != 1 << n {
            return Err(Error::Structure(format!(
                "Möbius table for n = {n} needs {} entries, got {}",
                1usize << n,
                coeffs.len()
            )));
        }
        Ok(Self { n, coeffs })
    }

    pub fn of(v: &SetFunction) -> Self {
        let mut coeffs: Vec<i64> = v.table().iter().map(|&b| b as i64).collect();
        inverse_subset_sums(&mut coeffs);
        Self { n: v.n(), coeffs }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn coeff(&self, a: Subset) -> i64 {
        self.coeffs[a.index()]
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// Nonzero coefficients in subset-index order.
    pub fn nonzero(&self) -> impl Iterator<Item = (Subset, i64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(a, &c)| (Subset(a as u32), c))
    }

    pub fn total(&self) -> i64 {
        self.coeffs.iter().sum()
    }

    /// Recovers `v`; fails if the subset sums leave `{0, 1}`.
    pub fn zeta(&self) -> Result<SetFunction> {
        let mut sums = self.coeffs.clone();
        subset_sums(&mut sums);
        let mut values = Vec::with_capacity(sums.len());
        for (a, s) in sums.into_iter().enumerate() {
            match s {
                0 => values.push(false),
                1 => values.push(true),
                other => {
                    return Err(Error::Structure(format!(
                        "zeta sum at {} is {other}, not binary",
                        Subset(a as u32)
                    )))
                }
            }
        }
        SetFunction::new(self.n, values)
    }

    /// `m̄(k) = Σ_{|A| = k} m(A)` for `k = 0..=n`.
    pub fn cardinality_sums(&self) -> Vec<i64> {
        let mut out = vec![0; self.n + 1];
        for (a, c) in self.nonzero() {
            out[a.len()] += c;
        }
        out
    }
}

pub fn mobius(v: &SetFunction) -> MobiusVector {
    MobiusVector::of(v)
}

pub fn zeta(m: &MobiusVector) -> Result<SetFunction> {
    m.zeta()
}

pub fn symmetric_mobius(m: &MobiusVector) -> Vec<i64> {
    m.cardinality_sums()
}
