//! Coalition descriptors: finitely presented subsets of the naturals.
//!
//! A descriptor is a boolean combination of finite sets, arithmetic
//! progressions, geometric progressions and eventually periodic bit patterns.
//! Membership can always be decided straight off the syntax; the heavier
//! questions (counting, finiteness, density, equivalence) go through the
//! [`NormalForm`] computed by [`CoalitionDescriptor::normal_form`].

mod normal;
mod sparse;

pub use normal::{NormalForm, NormalizeError};
pub use sparse::{GeomTail, SparseError, SparseSet};

use crate::Q;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoalitionDescriptor {
    Finite(BTreeSet<u64>),
    Arith { start: u64, step: u64 },
    Geom { base: u64, ratio: u64 },
    Periodic { prefix: Vec<u64>, period: Vec<u64> },
    Complement(Box<CoalitionDescriptor>),
    Union(Box<CoalitionDescriptor>, Box<CoalitionDescriptor>),
    Intersection(Box<CoalitionDescriptor>, Box<CoalitionDescriptor>),
}

impl CoalitionDescriptor {
    pub fn finite<I: IntoIterator<Item = u64>>(points: I) -> Self {
        CoalitionDescriptor::Finite(points.into_iter().collect())
    }

    pub fn arith(start: u64, step: u64) -> Self {
        CoalitionDescriptor::Arith { start, step }
    }

    pub fn geom(base: u64, ratio: u64) -> Self {
        CoalitionDescriptor::Geom { base, ratio }
    }

    pub fn periodic(prefix: Vec<u64>, period: Vec<u64>) -> Self {
        CoalitionDescriptor::Periodic { prefix, period }
    }

    pub fn everything() -> Self {
        CoalitionDescriptor::periodic(vec![], vec![1])
    }

    pub fn complement(self) -> Self {
        CoalitionDescriptor::Complement(Box::new(self))
    }

    pub fn union(self, other: Self) -> Self {
        CoalitionDescriptor::Union(Box::new(self), Box::new(other))
    }

    pub fn intersection(self, other: Self) -> Self {
        CoalitionDescriptor::Intersection(Box::new(self), Box::new(other))
    }

    /// Membership by structural recursion, no normalization involved.
    pub fn contains(&self, n: u64) -> bool {
        match self {
            CoalitionDescriptor::Finite(pts) => pts.contains(&n),
            CoalitionDescriptor::Arith { start, step } => {
                if *step == 0 {
                    n == *start
                } else {
                    n >= *start && (n - start) % step == 0
                }
            }
            CoalitionDescriptor::Geom { base, ratio } => match (*base, *ratio) {
                (0, _) => n == 0,
                (c, 0) => n == c || n == 0,
                (c, 1) => n == c,
                (c, r) => {
                    let mut v = c;
                    loop {
                        if v == n {
                            return true;
                        }
                        match v.checked_mul(r) {
                            Some(next) if next <= n => v = next,
                            _ => return false,
                        }
                    }
                }
            },
            CoalitionDescriptor::Periodic { prefix, period } => {
                let idx = n as usize;
                if idx < prefix.len() {
                    prefix[idx] == 1
                } else if period.is_empty() {
                    false
                } else {
                    period[(idx - prefix.len()) % period.len()] == 1
                }
            }
            CoalitionDescriptor::Complement(inner) => !inner.contains(n),
            CoalitionDescriptor::Union(a, b) => a.contains(n) || b.contains(n),
            CoalitionDescriptor::Intersection(a, b) => a.contains(n) && b.contains(n),
        }
    }

    pub fn normal_form(&self) -> Result<NormalForm, NormalizeError> {
        match self {
            CoalitionDescriptor::Finite(pts) => Ok(NormalForm::finite(pts.iter().copied())),
            CoalitionDescriptor::Arith { start, step } => NormalForm::arith(*start, *step),
            CoalitionDescriptor::Geom { base, ratio } => Ok(NormalForm::geometric(*base, *ratio)),
            CoalitionDescriptor::Periodic { prefix, period } => {
                NormalForm::periodic(prefix, period)
            }
            CoalitionDescriptor::Complement(inner) => Ok(inner.normal_form()?.complement()),
            CoalitionDescriptor::Union(a, b) => a.normal_form()?.union(&b.normal_form()?),
            CoalitionDescriptor::Intersection(a, b) => {
                a.normal_form()?.intersect(&b.normal_form()?)
            }
        }
    }

    /// Members in the closed interval `[0, n]`.
    pub fn count_upto(&self, n: u64) -> Result<u64, NormalizeError> {
        Ok(self.normal_form()?.count_upto(n))
    }

    pub fn is_finite(&self) -> Result<bool, NormalizeError> {
        Ok(self.normal_form()?.is_finite())
    }

    pub fn is_cofinite(&self) -> Result<bool, NormalizeError> {
        Ok(self.normal_form()?.is_cofinite())
    }

    /// Natural density; defined for everything that normalizes.
    pub fn exact_density(&self) -> Result<Q, NormalizeError> {
        Ok(self.normal_form()?.density())
    }

    pub fn equivalent(&self, other: &CoalitionDescriptor) -> Result<bool, NormalizeError> {
        self.normal_form()?.equivalent(&other.normal_form()?)
    }
}
