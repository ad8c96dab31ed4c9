//! Forcing a choice function onto one block of a partition chain by pinning
//! as few cylinder coordinates as possible, one binary split at a time.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::coalitions::{ChoiceFunction, DEFAULT_EVAL_CAP};
use crate::seqcore::{AssignmentError, Cylinder, PartialAssignment};

#[derive(Debug, Error)]
pub enum MonoError {
    #[error("choice function and cylinder use different alphabets")]
    AlphabetMismatch,
    #[error("partition block is empty")]
    EmptyBlock,
    #[error("partition block covers the whole alphabet")]
    FullBlock,
    #[error("partition mentions {0}, outside the alphabet")]
    BlockValueOutOfAlphabet(u64),
    #[error("stage would take {required} evaluations, over the cap of {cap}")]
    CapExceeded { required: u128, cap: u64 },
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
}

/// A two-block split of the alphabet, described by its left block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryPartition {
    left: BTreeSet<u64>,
}

impl BinaryPartition {
    pub fn new(left: impl IntoIterator<Item = u64>) -> Self {
        BinaryPartition {
            left: left.into_iter().collect(),
        }
    }

    pub fn left(&self) -> &BTreeSet<u64> {
        &self.left
    }

    pub fn right(&self, k: u64) -> BTreeSet<u64> {
        (0..k).filter(|v| !self.left.contains(v)).collect()
    }

    fn validate(&self, k: u64) -> Result<(), MonoError> {
        if let Some(&v) = self.left.iter().find(|&&v| v >= k) {
            return Err(MonoError::BlockValueOutOfAlphabet(v));
        }
        if self.left.is_empty() {
            return Err(MonoError::EmptyBlock);
        }
        if self.left.len() as u64 == k {
            return Err(MonoError::FullBlock);
        }
        Ok(())
    }
}

/// The halving chain that separates every value: one split per bit.
pub fn bit_partitions(k: u64) -> Vec<BinaryPartition> {
    let mut out = vec![];
    let mut bit = 0;
    while (1u64 << bit) < k {
        out.push(BinaryPartition::new(
            (0..k).filter(|v| (v >> bit) & 1 == 0),
        ));
        bit += 1;
    }
    out
}

/// What the search settled on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MonochromeOutcome {
    /// The outcome is one fixed value on the final cylinder.
    Value(u64),
    /// The outcome stays inside this block; the partitions never separated
    /// its members.
    Block(BTreeSet<u64>),
}

fn digits(k: u64, len: usize, mut c: u128) -> Vec<u64> {
    let mut out = vec![0u64; len];
    for slot in out.iter_mut().rev() {
        *slot = (c % k as u128) as u64;
        c /= k as u128;
    }
    out
}

fn outcome_on(
    choice: &ChoiceFunction,
    assignment: &PartialAssignment,
    coords: &[u64],
    vals: &[u64],
) -> u64 {
    let mut overrides: Vec<(u64, u64)> = assignment
        .explicit()
        .iter()
        .map(|(&n, &v)| (n, v))
        .collect();
    overrides.extend(coords.iter().copied().zip(vals.iter().copied()));
    let x = assignment
        .tail_rule()
        .with_overrides(&overrides)
        .expect("override values were drawn from the same alphabet");
    choice.eval(&x)
}

// Every outcome the choice function reaches over the cylinder, with the
// listed coordinates pinned on top of it.
fn reachable(
    choice: &ChoiceFunction,
    assignment: &PartialAssignment,
    free_s: &[u64],
    pinned: &[u64],
    pin_vals: &[u64],
) -> BTreeSet<u64> {
    let open: Vec<u64> = free_s
        .iter()
        .copied()
        .filter(|c| !pinned.contains(c))
        .collect();
    let k = choice.alphabet_size();
    let total = (k as u128).pow(open.len() as u32);
    let mut coords = pinned.to_vec();
    coords.extend(&open);
    let mut out = BTreeSet::new();
    for c in 0..total {
        let mut vals = pin_vals.to_vec();
        vals.extend(digits(k, open.len(), c));
        out.insert(outcome_on(choice, assignment, &coords, &vals));
        if out.len() as u64 == k {
            break;
        }
    }
    out
}

fn subsets_of_size(items: &[u64], size: usize) -> Vec<Vec<u64>> {
    if size == 0 {
        return vec![vec![]];
    }
    if items.len() < size {
        return vec![];
    }
    let mut out = vec![];
    for (i, &head) in items.iter().enumerate() {
        for mut rest in subsets_of_size(&items[i + 1..], size - 1) {
            rest.insert(0, head);
            out.push(rest);
        }
    }
    out
}

pub fn monochromatize(
    choice: &ChoiceFunction,
    cylinder: &Cylinder,
    partitions: &[BinaryPartition],
) -> Result<(Cylinder, MonochromeOutcome), MonoError> {
    monochromatize_capped(choice, cylinder, partitions, DEFAULT_EVAL_CAP)
}

/// Walks the partition chain; at each stage either the reachable outcomes
/// already sit in one block, or the fewest supported coordinates are pinned
/// (smallest set, then least values) to force them into one.  Only finitely
/// many coordinates, all supported, are ever lost.
pub fn monochromatize_capped(
    choice: &ChoiceFunction,
    cylinder: &Cylinder,
    partitions: &[BinaryPartition],
    cap: u64,
) -> Result<(Cylinder, MonochromeOutcome), MonoError> {
    let assignment = cylinder.assignment();
    if choice.alphabet() != assignment.alphabet() {
        return Err(MonoError::AlphabetMismatch);
    }
    let k = choice.alphabet_size();
    for p in partitions {
        p.validate(k)?;
    }
    let mut current = assignment.clone();
    let mut narrowed: BTreeSet<u64> = (0..k).collect();
    let mut last_seen: Option<BTreeSet<u64>> = None;
    for partition in partitions {
        let free_s: Vec<u64> = choice
            .support()
            .iter()
            .copied()
            .filter(|&c| current.is_free(c))
            .collect();
        let m = free_s.len() as u32;
        let worst = (k as u128).pow(m).saturating_mul(1u128 << m.min(127));
        if worst > cap as u128 {
            return Err(MonoError::CapExceeded {
                required: worst,
                cap,
            });
        }
        let left = partition.left().clone();
        let right = partition.right(k);
        let chosen;
        let mut values = reachable(choice, &current, &free_s, &[], &[]);
        if values.is_subset(&left) {
            chosen = left;
        } else if values.is_subset(&right) {
            chosen = right;
        } else {
            let mut found = None;
            'search: for size in 1..=free_s.len() {
                for coords in subsets_of_size(&free_s, size) {
                    let total = (k as u128).pow(size as u32);
                    for c in 0..total {
                        let vals = digits(k, size, c);
                        let seen = reachable(choice, &current, &free_s, &coords, &vals);
                        if seen.is_subset(&left) {
                            found = Some((coords, vals, seen, left.clone()));
                            break 'search;
                        }
                        if seen.is_subset(&right) {
                            found = Some((coords, vals, seen, right.clone()));
                            break 'search;
                        }
                    }
                }
            }
            let (coords, vals, seen, block) =
                found.expect("pinning every supported coordinate leaves a single outcome");
            for (&c, &v) in coords.iter().zip(&vals) {
                current = current.with_value(c, v)?;
            }
            values = seen;
            chosen = block;
        }
        narrowed = narrowed.intersection(&chosen).copied().collect();
        last_seen = Some(values);
    }
    let values = last_seen.unwrap_or_else(|| {
        let free_s: Vec<u64> = choice
            .support()
            .iter()
            .copied()
            .filter(|&c| current.is_free(c))
            .collect();
        reachable(choice, &current, &free_s, &[], &[])
    });
    let outcome = if values.len() == 1 {
        MonochromeOutcome::Value(*values.iter().next().expect("just checked"))
    } else {
        MonochromeOutcome::Block(narrowed)
    };
    Ok((current.cylinder(), outcome))
}
