//! Finite-support permutations of the coordinate axis.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum PermError {
    #[error("coordinate {0} is mapped twice")]
    DuplicateSource(u64),
    #[error("coordinate {0} is hit twice")]
    DuplicateImage(u64),
    #[error("image {0} never occurs as a source")]
    NotBijective(u64),
    #[error("a cycle needs at least two distinct coordinates")]
    ShortCycle,
    #[error("unreadable cycle notation at byte {0}")]
    Notation(usize),
}

/// A bijection of the naturals moving only finitely many coordinates.
///
/// Only the moved coordinates are stored; everything else is fixed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FinitePermutation {
    map: BTreeMap<u64, u64>,
}

impl FinitePermutation {
    pub fn identity() -> Self {
        FinitePermutation::default()
    }

    /// Build from `source -> image` pairs; fixed points may be listed or not.
    pub fn from_pairs(pairs: &[(u64, u64)]) -> Result<Self, PermError> {
        let mut map = BTreeMap::new();
        let mut images = BTreeSet::new();
        for &(s, t) in pairs {
            if map.insert(s, t).is_some() {
                return Err(PermError::DuplicateSource(s));
            }
            if !images.insert(t) {
                return Err(PermError::DuplicateImage(t));
            }
        }
        for &t in &images {
            if !map.contains_key(&t) {
                return Err(PermError::NotBijective(t));
            }
        }
        map.retain(|k, v| k != v);
        Ok(FinitePermutation { map })
    }

    /// Product of disjoint transpositions.
    pub fn from_swaps(swaps: &[(u64, u64)]) -> Result<Self, PermError> {
        let mut pairs = Vec::with_capacity(swaps.len() * 2);
        for &(a, b) in swaps {
            if a == b {
                return Err(PermError::ShortCycle);
            }
            pairs.push((a, b));
            pairs.push((b, a));
        }
        FinitePermutation::from_pairs(&pairs)
    }

    /// Product of cycles, each written as the orbit of its first element.
    pub fn from_cycles(cycles: &[Vec<u64>]) -> Result<Self, PermError> {
        let mut pairs = Vec::new();
        for cycle in cycles {
            if cycle.len() < 2 {
                return Err(PermError::ShortCycle);
            }
            for (i, &a) in cycle.iter().enumerate() {
                pairs.push((a, cycle[(i + 1) % cycle.len()]));
            }
        }
        FinitePermutation::from_pairs(&pairs)
    }

    pub fn apply(&self, n: u64) -> u64 {
        self.map.get(&n).copied().unwrap_or(n)
    }

    pub fn inverse(&self) -> Self {
        FinitePermutation {
            map: self.map.iter().map(|(&k, &v)| (v, k)).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }

    /// Moved coordinates, ascending.
    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.map.keys().copied()
    }

    /// Disjoint cycles, each starting at its least element, ordered by it.
    pub fn cycles(&self) -> Vec<Vec<u64>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in self.map.keys() {
            if seen.contains(&start) {
                continue;
            }
            let mut cycle = vec![start];
            seen.insert(start);
            let mut cur = self.apply(start);
            while cur != start {
                seen.insert(cur);
                cycle.push(cur);
                cur = self.apply(cur);
            }
            out.push(cycle);
        }
        out
    }
}

impl fmt::Display for FinitePermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "id");
        }
        for cycle in self.cycles() {
            write!(f, "(")?;
            for (i, c) in cycle.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl FromStr for FinitePermutation {
    type Err = PermError;

    fn from_str(s: &str) -> Result<Self, PermError> {
        let s = s.trim();
        if s == "id" {
            return Ok(FinitePermutation::identity());
        }
        let mut cycles = Vec::new();
        let mut offset = 0;
        let mut rest = s;
        while !rest.is_empty() {
            let body = rest
                .strip_prefix('(')
                .ok_or(PermError::Notation(offset))?;
            let close = body.find(')').ok_or(PermError::Notation(offset))?;
            let mut cycle = Vec::new();
            for token in body[..close].split_whitespace() {
                cycle.push(token.parse().map_err(|_| PermError::Notation(offset))?);
            }
            cycles.push(cycle);
            offset += close + 2;
            rest = &body[close + 1..];
        }
        FinitePermutation::from_cycles(&cycles)
    }
}
