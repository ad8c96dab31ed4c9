//! Eventually periodic sequences over a finite or unbounded alphabet.
//!
//! An [`EventuallyPeriodicSeq`] stores a finite prefix and a nonempty period and denotes the
//! total function `n -> prefix[n]` for `n < |prefix|`, then
//! `period[(n - |prefix|) mod |period|]`. Equality of the denoted functions is
//! decidable by comparing on a window of length `max prefix + lcm of periods`;
//! [`EventuallyPeriodicSeq::same_function`] does exactly that.

use num::integer::lcm;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Value alphabet of a sequence or assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Alphabet {
    /// Values range over `0..k`.
    Bounded(u64),
    /// Values range over all naturals.
    Unbounded,
}

impl Alphabet {
    pub fn admits(&self, v: u64) -> bool {
        match self {
            Alphabet::Bounded(k) => v < *k,
            Alphabet::Unbounded => true,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StreamError {
    #[error("period must be nonempty")]
    EmptyPeriod,
    #[error("value {value} outside alphabet of size {k}")]
    ValueOutOfAlphabet { value: u64, k: u64 },
}

/// An eventually periodic sequence `N -> N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventuallyPeriodicSeq {
    alphabet: Alphabet,
    prefix: Vec<u64>,
    period: Vec<u64>,
}

impl EventuallyPeriodicSeq {
    pub fn new(
        alphabet: Alphabet,
        prefix: Vec<u64>,
        period: Vec<u64>,
    ) -> Result<Self, StreamError> {
        if period.is_empty() {
            return Err(StreamError::EmptyPeriod);
        }
        for &v in prefix.iter().chain(period.iter()) {
            if !alphabet.admits(v) {
                let k = match alphabet {
                    Alphabet::Bounded(k) => k,
                    Alphabet::Unbounded => unreachable!(),
                };
                return Err(StreamError::ValueOutOfAlphabet { value: v, k });
            }
        }
        Ok(EventuallyPeriodicSeq {
            alphabet,
            prefix,
            period,
        })
    }

    /// Constant sequence with the given value.
    pub fn constant(alphabet: Alphabet, v: u64) -> Self {
        EventuallyPeriodicSeq::new(alphabet, vec![], vec![v]).expect("constant sequence is well formed")
    }

    /// Binary sequence from characteristic words; convenience for 0/1 streams.
    pub fn binary(prefix: Vec<u64>, period: Vec<u64>) -> Result<Self, StreamError> {
        EventuallyPeriodicSeq::new(Alphabet::Bounded(2), prefix, period)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn prefix(&self) -> &[u64] {
        &self.prefix
    }

    pub fn period(&self) -> &[u64] {
        &self.period
    }

    /// Value at coordinate `n`.
    pub fn eval(&self, n: u64) -> u64 {
        let pl = self.prefix.len() as u64;
        if n < pl {
            self.prefix[n as usize]
        } else {
            let idx = (n - pl) % self.period.len() as u64;
            self.period[idx as usize]
        }
    }

    /// First `len` values, materialized.
    pub fn window(&self, len: u64) -> Vec<u64> {
        (0..len).map(|n| self.eval(n)).collect()
    }

    /// Length of a window on which two sequences must agree to agree everywhere.
    pub fn decision_window(&self, other: &EventuallyPeriodicSeq) -> u64 {
        let start = self.prefix.len().max(other.prefix.len()) as u64;
        start + lcm(self.period.len() as u64, other.period.len() as u64)
    }

    /// Do the two sequences denote the same total function?
    pub fn same_function(&self, other: &EventuallyPeriodicSeq) -> bool {
        let w = self.decision_window(other);
        (0..w).all(|n| self.eval(n) == other.eval(n))
    }

    /// Copy with finitely many coordinates overridden.
    ///
    /// The prefix is widened to cover every override, so the period is
    /// untouched.
    pub fn with_overrides(&self, overrides: &[(u64, u64)]) -> Result<Self, StreamError> {
        let max = overrides.iter().map(|&(n, _)| n + 1).max().unwrap_or(0);
        let plen = self.prefix.len() as u64;
        let per = self.period.len() as u64;
        // Widen by whole periods so the phase beyond the new prefix is kept.
        let cut = if max > plen {
            plen + (max - plen).div_ceil(per) * per
        } else {
            plen
        };
        let mut prefix = self.window(cut);
        for &(n, v) in overrides {
            prefix[n as usize] = v;
        }
        EventuallyPeriodicSeq::new(self.alphabet, prefix, self.period.clone())
    }

    /// Canonical form: primitive period, then shortest prefix.
    pub fn normalize(&self) -> Self {
        let mut period = self.period.clone();
        // Shrink to the primitive root of the period word.
        for d in 1..=period.len() / 2 {
            if period.len() % d == 0 && period.chunks(d).all(|c| c == &period[..d]) {
                period.truncate(d);
                break;
            }
        }
        let mut prefix = self.prefix.clone();
        // Fold prefix tail into the period while the last symbol matches the
        // rotation that would produce it.
        while let Some(&last) = prefix.last() {
            if last == period[period.len() - 1] {
                period.rotate_right(1);
                prefix.pop();
            } else {
                break;
            }
        }
        EventuallyPeriodicSeq {
            alphabet: self.alphabet,
            prefix,
            period,
        }
    }

    /// Coordinates below `horizon` where the value is nonzero.
    pub fn support_below(&self, horizon: u64) -> Vec<u64> {
        (0..horizon).filter(|&n| self.eval(n) != 0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(prefix: &[u64], period: &[u64]) -> EventuallyPeriodicSeq {
        EventuallyPeriodicSeq::binary(prefix.to_vec(), period.to_vec()).unwrap()
    }

    #[test]
    fn overrides_beyond_prefix_keep_the_period_phase() {
        let s = bin(&[], &[0, 1]);
        let t = s.with_overrides(&[(2, 1)]).unwrap();
        assert_eq!(t.eval(2), 1);
        for n in [0, 1, 3, 4, 5, 6, 7, 20, 21] {
            assert_eq!(t.eval(n), s.eval(n), "phase broke at {n}");
        }
    }

    #[test]
    fn eval_crosses_prefix_boundary() {
        let s = bin(&[1, 1, 0], &[0, 1]);
        assert_eq!(s.window(8), vec![1, 1, 0, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn same_function_ignores_presentation() {
        let a = bin(&[], &[0, 1]);
        let b = bin(&[0, 1], &[0, 1, 0, 1]);
        assert!(a.same_function(&b));
        let c = bin(&[1], &[0, 1]);
        assert!(!a.same_function(&c));
    }

    #[test]
    fn normalize_reaches_primitive_form() {
        let a = bin(&[0, 1], &[0, 1, 0, 1]);
        let n = a.normalize();
        assert_eq!(n.prefix(), &[] as &[u64]);
        assert_eq!(n.period(), &[0, 1]);
        let b = bin(&[1, 0, 0], &[1, 0, 0]);
        let nb = b.normalize();
        assert_eq!(nb.prefix(), &[] as &[u64]);
        assert_eq!(nb.period(), &[1, 0, 0]);
        assert!(b.same_function(&nb));
    }

    #[test]
    fn overrides_extend_prefix_only() {
        let s = bin(&[], &[1]);
        let t = s.with_overrides(&[(3, 0)]).unwrap();
        assert_eq!(t.window(6), vec![1, 1, 1, 0, 1, 1]);
        assert_eq!(t.period(), &[1]);
    }

    #[test]
    fn alphabet_is_enforced() {
        assert_eq!(
            EventuallyPeriodicSeq::new(Alphabet::Bounded(2), vec![2], vec![0]),
            Err(StreamError::ValueOutOfAlphabet { value: 2, k: 2 })
        );
        assert_eq!(
            EventuallyPeriodicSeq::new(Alphabet::Unbounded, vec![], vec![]),
            Err(StreamError::EmptyPeriod)
        );
    }
}
