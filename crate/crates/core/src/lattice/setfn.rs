use crate::error::{Error, Result, Violation};

use super::subset::{Subset, MAX_UNITS};

/// A binary set function `v: 2^[n] -> {0,1}`, stored as a full truth table.
///
/// Entry `A.index()` holds `v(A)`. The same table also stands for the life
/// function selector `w = γ∘v` with codomain `{0, +∞}`: see [`SetFunction::selector`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetFunction {
    n: usize,
    values: Vec<bool>,
}

/// Minimal path sets and minimal cut sets of a semicoherent system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCutSets {
    pub paths: Vec<Subset>,
    pub cuts: Vec<Subset>,
}

pub(crate) fn check_units(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Structure("a system needs at least one component".into()));
    }
    if n > MAX_UNITS {
        return Err(Error::TooManyUnits {
            count: n,
            max: MAX_UNITS,
        });
    }
    Ok(())
}

impl SetFunction {
    pub fn new(n: usize, values: Vec<bool>) -> Result<Self> {
        check_units(n)?;
        if values.len() != 1 << n {
            return Err(Error::Structure(format!(
                "table for n = {n} needs {} entries, got {}",
                1usize << n,
                values.len()
            )));
        }
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(Subset) -> bool) -> Result<Self> {
        check_units(n)?;
        let values = (0..1u32 << n).map(|a| f(Subset(a))).collect();
        Ok(Self { n, values })
    }

    /// Upward closure of a family of path sets: `v(A) = 1` iff `A` contains one of them.
    pub fn from_paths(n: usize, paths: &[Subset]) -> Result<Self> {
        check_units(n)?;
        let full = Subset::full(n);
        if let Some(bad) = paths.iter().find(|p| !p.is_subset_of(full)) {
            return Err(Error::Structure(format!("path {bad} is not a subset of [{n}]")));
        }
        let mut values = vec![false; 1 << n];
        for p in paths {
            values[p.index()] = true;
        }
        // superset closure, one coordinate at a time
        for bit in 0..n {
            let step = 1usize << bit;
            for a in 0..values.len() {
                if a & step != 0 && values[a ^ step] {
                    values[a] = true;
                }
            }
        }
        Ok(Self { n, values })
    }

    pub fn series(n: usize) -> Result<Self> {
        Self::from_fn(n, |a| a.len() == n)
    }

    pub fn parallel(n: usize) -> Result<Self> {
        Self::from_fn(n, |a| !a.is_empty())
    }

    pub fn k_out_of_n(k: usize, n: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::Structure(format!("k = {k} must lie in 1..={n}")));
        }
        Self::from_fn(n, |a| a.len() >= k)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn value(&self, a: Subset) -> bool {
        self.values[a.index()]
    }

    pub fn table(&self) -> &[bool] {
        &self.values
    }

    /// `w(A) = γ(v(A))` on the lattice `[0, +∞]`.
    pub fn selector(&self, a: Subset) -> f64 {
        if self.value(a) {
            f64::INFINITY
        } else {
            0.0
        }
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&x| x == self.values[0])
    }

    /// Checks `v(∅) = 0`, `v([n]) = 1` and monotonicity, reporting the first
    /// violating covering pair `A ⊊ A ∪ {i}`.
    pub fn check_semicoherent(&self) -> std::result::Result<(), Violation> {
        if self.values[0] {
            return Err(Violation::EmptySetWorks);
        }
        if !self.values[Subset::full(self.n).index()] {
            return Err(Violation::FullSetFails);
        }
        for a in 0..self.values.len() {
            if !self.values[a] {
                continue;
            }
            for bit in 0..self.n {
                let b = a | 1 << bit;
                if b != a && !self.values[b] {
                    return Err(Violation::NotMonotone {
                        smaller: Subset(a as u32),
                        larger: Subset(b as u32),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn is_semicoherent(&self) -> bool {
        self.check_semicoherent().is_ok()
    }

    pub fn require_semicoherent(&self) -> Result<()> {
        self.check_semicoherent().map_err(Error::NotSemicoherent)
    }

    /// `v*(A) = 1 - v([n] \ A)`.
    pub fn dual(&self) -> SetFunction {
        let full = Subset::full(self.n).index();
        let values = (0..self.values.len())
            .map(|a| !self.values[full ^ a])
            .collect();
        SetFunction { n: self.n, values }
    }

    /// Subsets where `v` switches on and every proper subset is off.
    pub fn minimal_true_sets(&self) -> Vec<Subset> {
        (0..self.values.len())
            .filter(|&a| {
                self.values[a] && (0..self.n).all(|bit| a & 1 << bit == 0 || !self.values[a ^ 1 << bit])
            })
            .map(|a| Subset(a as u32))
            .collect()
    }

    /// Minimal path sets of `v` and minimal cut sets (the minimal path sets of `v*`).
    ///
    /// Checking only one-element removals is enough because `v` is monotone.
    pub fn minimal_paths_cuts(&self) -> Result<PathCutSets> {
        self.require_semicoherent()?;
        let mut paths = self.minimal_true_sets();
        let mut cuts = self.dual().minimal_true_sets();
        sort_sets(&mut paths);
        sort_sets(&mut cuts);
        Ok(PathCutSets { paths, cuts })
    }
}

/// Orders sets by size, then lexicographically by member list.
fn sort_sets(sets: &mut [Subset]) {
    sets.sort_by(|a, b| {
        a.len()
            .cmp(&b.len())
            .then_with(|| a.members().cmp(b.members()))
    });
}
