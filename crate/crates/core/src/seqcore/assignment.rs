//! Partial assignments and the cylinders they carve out.
//!
//! A [`PartialAssignment`] is a finitely described partial function from the
//! naturals into an alphabet: a symbolic set of free coordinates, explicit
//! values at finitely many bound coordinates, and an eventually periodic rule
//! for the rest of the domain. Its cylinder is the set of total sequences
//! extending it. When the free set is infinite the assignment is a silver
//! condition; that predicate is decided once at construction and cached.

use crate::seqcore::descriptor::{CoalitionDescriptor, NormalizeError};
use crate::seqcore::stream::{Alphabet, EventuallyPeriodicSeq};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum AssignmentError {
    #[error("bounded alphabet must have at least two symbols, got {0}")]
    AlphabetTooSmall(u64),
    #[error("alphabets of the sequence and the cylinder differ")]
    AlphabetMismatch,
    #[error("explicit value {value} at coordinate {coordinate} is outside the alphabet")]
    ValueOutOfAlphabet { coordinate: u64, value: u64 },
    #[error("coordinate {0} is free but carries an explicit value")]
    ExplicitOnFree(u64),
    #[error("coordinate {0} is not free")]
    NotFree(u64),
    #[error("free coordinates are not an eventually periodic set")]
    FreeNotEventuallyPeriodic,
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
}

#[derive(Debug, Clone)]
pub struct PartialAssignment {
    alphabet: Alphabet,
    free: CoalitionDescriptor,
    explicit: BTreeMap<u64, u64>,
    tail_rule: EventuallyPeriodicSeq,
    silver: bool,
    // Scan bound for free coordinates when there are only finitely many.
    finite_free_bound: Option<u64>,
}

impl PartialAssignment {
    /// `free` lists the unconstrained coordinates; everywhere else the value
    /// is the explicit entry if present, otherwise the tail rule.
    pub fn new(
        alphabet: Alphabet,
        free: CoalitionDescriptor,
        explicit: BTreeMap<u64, u64>,
        tail_rule: EventuallyPeriodicSeq,
    ) -> Result<Self, AssignmentError> {
        if let Alphabet::Bounded(k) = alphabet {
            if k < 2 {
                return Err(AssignmentError::AlphabetTooSmall(k));
            }
        }
        if tail_rule.alphabet() != alphabet {
            return Err(AssignmentError::AlphabetMismatch);
        }
        for (&coordinate, &value) in &explicit {
            if free.contains(coordinate) {
                return Err(AssignmentError::ExplicitOnFree(coordinate));
            }
            if !alphabet.admits(value) {
                return Err(AssignmentError::ValueOutOfAlphabet { coordinate, value });
            }
        }
        let nf = free.normal_form()?;
        let silver = !nf.is_finite();
        let finite_free_bound =
            (!silver).then(|| nf.to_word().map_or(0, |w| w.prefix().len() as u64));
        Ok(PartialAssignment {
            alphabet,
            free,
            explicit,
            tail_rule,
            silver,
            finite_free_bound,
        })
    }

    /// Assignment with empty domain: everything free.
    pub fn unconstrained(alphabet: Alphabet) -> Self {
        let zero = EventuallyPeriodicSeq::constant(alphabet, 0);
        PartialAssignment::new(
            alphabet,
            CoalitionDescriptor::everything(),
            BTreeMap::new(),
            zero,
        )
        .expect("no constraints to violate")
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn free(&self) -> &CoalitionDescriptor {
        &self.free
    }

    pub fn explicit(&self) -> &BTreeMap<u64, u64> {
        &self.explicit
    }

    pub fn tail_rule(&self) -> &EventuallyPeriodicSeq {
        &self.tail_rule
    }

    pub fn is_free(&self, n: u64) -> bool {
        self.free.contains(n)
    }

    /// `None` exactly on free coordinates.
    pub fn value_at(&self, n: u64) -> Option<u64> {
        if self.is_free(n) {
            None
        } else {
            Some(
                self.explicit
                    .get(&n)
                    .copied()
                    .unwrap_or_else(|| self.tail_rule.eval(n)),
            )
        }
    }

    /// Free set is infinite; decided at construction.
    pub fn is_silver(&self) -> bool {
        self.silver
    }

    pub fn domain(&self) -> CoalitionDescriptor {
        self.free.clone().complement()
    }

    /// The k-th free coordinate in increasing order.
    pub fn nth_free(&self, k: u64) -> Option<u64> {
        let mut seen = 0u64;
        let mut n = 0u64;
        loop {
            if let Some(bound) = self.finite_free_bound {
                if n >= bound {
                    return None;
                }
            }
            if self.is_free(n) {
                if seen == k {
                    return Some(n);
                }
                seen += 1;
            }
            n += 1;
        }
    }

    pub fn free_below(&self, bound: u64) -> Vec<u64> {
        (0..bound).filter(|&n| self.is_free(n)).collect()
    }

    /// Values strictly below the first free coordinate; the whole word is
    /// determined there, so this is the stem of the cylinder.
    pub fn stem(&self) -> Vec<u64> {
        let cut = match self.nth_free(0) {
            Some(a0) => a0,
            None => return Vec::new(),
        };
        (0..cut).map(|n| self.value_at(n).expect("below first free")).collect()
    }

    /// Bind one free coordinate to a value.
    pub fn with_value(&self, n: u64, value: u64) -> Result<Self, AssignmentError> {
        if !self.is_free(n) {
            return Err(AssignmentError::NotFree(n));
        }
        if !self.alphabet.admits(value) {
            return Err(AssignmentError::ValueOutOfAlphabet {
                coordinate: n,
                value,
            });
        }
        let free = self
            .free
            .clone()
            .intersection(CoalitionDescriptor::finite([n]).complement());
        let mut explicit = self.explicit.clone();
        explicit.insert(n, value);
        PartialAssignment::new(self.alphabet, free, explicit, self.tail_rule.clone())
    }

    /// Total sequence putting `fill_value` on every free coordinate. Works
    /// when the free set is eventually periodic, which makes the result so.
    pub fn fill(&self, fill_value: u64) -> Result<EventuallyPeriodicSeq, AssignmentError> {
        if !self.alphabet.admits(fill_value) {
            return Err(AssignmentError::ValueOutOfAlphabet {
                coordinate: 0,
                value: fill_value,
            });
        }
        let free_word = self
            .free
            .normal_form()?
            .to_word()
            .ok_or(AssignmentError::FreeNotEventuallyPeriodic)?;
        let explicit_end = self.explicit.last_key_value().map_or(0, |(&k, _)| k + 1);
        let cut = (free_word.prefix().len() as u64)
            .max(self.tail_rule.prefix().len() as u64)
            .max(explicit_end);
        let per = num::integer::lcm(
            free_word.period().len() as u64,
            self.tail_rule.period().len() as u64,
        );
        let at = |n: u64| {
            if free_word.eval(n) == 1 {
                fill_value
            } else {
                self.value_at(n).expect("not free")
            }
        };
        let prefix = (0..cut).map(at).collect();
        let period = (cut..cut + per).map(at).collect();
        Ok(EventuallyPeriodicSeq::new(self.alphabet, prefix, period)
            .expect("values were admitted")
            .normalize())
    }

    pub fn cylinder(self) -> Cylinder {
        Cylinder { assignment: self }
    }
}

/// The set of total sequences extending an assignment.
#[derive(Debug, Clone)]
pub struct Cylinder {
    assignment: PartialAssignment,
}

impl Cylinder {
    pub fn new(assignment: PartialAssignment) -> Self {
        Cylinder { assignment }
    }

    pub fn assignment(&self) -> &PartialAssignment {
        &self.assignment
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    AgreesToDepth(u64),
    DisagreesAt(u64),
}

/// Check `x` against the cylinder on coordinates below `depth`; reports the
/// least bound coordinate where they differ.
pub fn cylinder_member(
    x: &EventuallyPeriodicSeq,
    c: &Cylinder,
    depth: u64,
) -> Result<Membership, AssignmentError> {
    if x.alphabet() != c.assignment.alphabet() {
        return Err(AssignmentError::AlphabetMismatch);
    }
    for n in 0..depth {
        if let Some(v) = c.assignment.value_at(n) {
            if x.eval(n) != v {
                return Ok(Membership::DisagreesAt(n));
            }
        }
    }
    Ok(Membership::AgreesToDepth(depth))
}
