//! Finite conditions for the branching-density order: uniform binary trees,
//! end-extension, threading through a dense set, and boosting the splitting
//! ratio measured back on a source tree through its spine map.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::constructions::delta_tree::DenseOracle;
use crate::seqcore::{Alphabet, FiniteTree, PartialAssignment, SplittingReport, TreeError};
use crate::{q, Q};

/// Largest source coordinate the density search will walk to.
pub const VALUE_HORIZON: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum ForcingError {
    #[error("terminals do not share one length")]
    NonUniform,
    #[error("a condition needs at least one terminal")]
    EmptyCondition,
    #[error("conditions live on two symbols, found {0}")]
    NotBinary(u64),
    #[error("spine needs infinitely many free coordinates")]
    NotSilver,
    #[error("spine words are binary, found value {0}")]
    SpineValueOutOfRange(u64),
    #[error("oracle answered {output:?}, which does not extend {input:?}")]
    NotAnExtension { input: Vec<u64>, output: Vec<u64> },
    #[error("threaded terminal {terminal:?} still fails the predicate")]
    ThreadingUncertified { terminal: Vec<u64> },
    #[error("ratio {bound} not reached by any extension with coordinates below {value_horizon}")]
    DensityUnreachable { bound: Q, value_horizon: u64 },
    #[error("exponent {0} too large for exact arithmetic")]
    ExponentTooLarge(u32),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// A nonempty finite tree whose terminals all have the same length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformFiniteTree {
    tree: FiniteTree,
}

impl UniformFiniteTree {
    pub fn new(tree: FiniteTree) -> Result<Self, ForcingError> {
        let terms = tree.term();
        let first = match terms.first() {
            Some(t) => t.len(),
            None => return Err(ForcingError::EmptyCondition),
        };
        if terms.iter().any(|t| t.len() != first) {
            return Err(ForcingError::NonUniform);
        }
        Ok(UniformFiniteTree { tree })
    }

    /// The full cube: every word of the given length.
    pub fn cube(k: u64, height: u64) -> Result<Self, ForcingError> {
        let count = (k as u128)
            .checked_pow(height as u32)
            .ok_or(TreeError::TooManyTerminals(u128::MAX))?;
        if count > (1 << 16) {
            return Err(ForcingError::Tree(TreeError::TooManyTerminals(count)));
        }
        let mut words = vec![vec![]];
        for _ in 0..height {
            words = words
                .into_iter()
                .flat_map(|w| {
                    (0..k).map(move |s| {
                        let mut next = w.clone();
                        next.push(s);
                        next
                    })
                })
                .collect();
        }
        Ok(UniformFiniteTree {
            tree: FiniteTree::new(k, words)?,
        })
    }

    pub fn tree(&self) -> &FiniteTree {
        &self.tree
    }

    pub fn terminal_len(&self) -> u64 {
        self.tree.term()[0].len() as u64
    }

    pub fn alphabet_size(&self) -> u64 {
        self.tree.alphabet_size()
    }

    /// Whether self refines `other`: every terminal of self passes through a
    /// terminal of `other`, and every terminal of `other` is kept alive.
    pub fn end_extends(&self, other: &UniformFiniteTree) -> bool {
        let cut = other.terminal_len() as usize;
        if (self.terminal_len() as usize) < cut {
            return false;
        }
        let stumps: BTreeSet<&[u64]> = self.tree.term().iter().map(|t| &t[..cut]).collect();
        let theirs: BTreeSet<&[u64]> = other.tree.term().iter().map(|t| t.as_slice()).collect();
        stumps == theirs
    }

    /// Grafts the full cube of the given height onto every terminal.
    pub fn extend_full(&self, levels: u64) -> Result<Self, ForcingError> {
        if levels == 0 {
            return Ok(self.clone());
        }
        let k = self.alphabet_size();
        let cube = Self::cube(k, levels)?;
        let count = self.tree.term().len() as u128 * cube.tree.term().len() as u128;
        if count > (1 << 16) {
            return Err(ForcingError::Tree(TreeError::TooManyTerminals(count)));
        }
        let mut words = Vec::with_capacity(count as usize);
        for t in self.tree.term() {
            for c in cube.tree.term() {
                let mut w = t.clone();
                w.extend_from_slice(c);
                words.push(w);
            }
        }
        Ok(UniformFiniteTree {
            tree: FiniteTree::new(k, words)?,
        })
    }
}

/// Threads one shared word through every terminal so that each lands inside
/// the dense set, sweeping terminals in order and growing the word as needed.
/// The result end-extends the input and has no new splitting.
pub fn meet_dense(
    p: &UniformFiniteTree,
    oracle: &DenseOracle,
) -> Result<UniformFiniteTree, ForcingError> {
    let mut r: Vec<u64> = vec![];
    for t in p.tree().term() {
        let mut probe = t.clone();
        probe.extend_from_slice(&r);
        let answer = oracle.extend(&probe);
        if !answer.starts_with(&probe) {
            return Err(ForcingError::NotAnExtension {
                input: probe,
                output: answer,
            });
        }
        r = answer[t.len()..].to_vec();
    }
    let mut words = Vec::with_capacity(p.tree().term().len());
    for t in p.tree().term() {
        let mut w = t.clone();
        w.extend_from_slice(&r);
        if !oracle.inside(&w) {
            return Err(ForcingError::ThreadingUncertified { terminal: w });
        }
        words.push(w);
    }
    Ok(UniformFiniteTree {
        tree: FiniteTree::new(p.alphabet_size(), words)?,
    })
}

/// Translation between a source tree with infinitely many free coordinates
/// and the binary words that record only the free choices.  The j-th letter
/// of a word drives the j-th free coordinate; everything else follows the
/// assignment.
#[derive(Debug, Clone)]
pub struct SpineMap {
    source: PartialAssignment,
}

impl SpineMap {
    pub fn new(source: PartialAssignment) -> Result<Self, ForcingError> {
        match source.alphabet() {
            Alphabet::Bounded(2) => {}
            Alphabet::Bounded(k) => return Err(ForcingError::NotBinary(k)),
            Alphabet::Unbounded => return Err(ForcingError::NotBinary(u64::MAX)),
        }
        if !source.is_silver() {
            return Err(ForcingError::NotSilver);
        }
        Ok(SpineMap { source })
    }

    pub fn source(&self) -> &PartialAssignment {
        &self.source
    }

    /// The source coordinate driven by word position `j`.
    pub fn coordinate(&self, j: u64) -> u64 {
        self.source.nth_free(j).expect("silver source has infinitely many free coordinates")
    }

    // Source word of length `len` following the assignment, with the word's
    // letters at the free coordinates met along the way.
    fn expand_to(&self, w: &[u64], len: u64) -> Result<Vec<u64>, ForcingError> {
        let mut out = Vec::with_capacity(len as usize);
        let mut used = 0usize;
        for n in 0..len {
            match self.source.value_at(n) {
                Some(v) => out.push(v),
                None => {
                    let v = w.get(used).copied().unwrap_or(0);
                    if v > 1 {
                        return Err(ForcingError::SpineValueOutOfRange(v));
                    }
                    out.push(v);
                    used += 1;
                }
            }
        }
        Ok(out)
    }

    /// Source word through the last free coordinate the input word drives;
    /// the empty word maps to the stem.
    pub fn expand(&self, w: &[u64]) -> Result<Vec<u64>, ForcingError> {
        let len = match w.len() {
            0 => self.coordinate(0),
            n => self.coordinate(n as u64 - 1) + 1,
        };
        self.expand_to(w, len)
    }

    /// Free-coordinate letters of a source word, when its pinned coordinates
    /// all match the assignment.
    pub fn collapse(&self, t: &[u64]) -> Option<Vec<u64>> {
        let mut out = vec![];
        for (n, &v) in t.iter().enumerate() {
            match self.source.value_at(n as u64) {
                Some(expected) if expected == v => {}
                Some(_) => return None,
                None => out.push(v),
            }
        }
        Some(out)
    }

    /// Splitting statistics of the condition carried back to the source: a
    /// split at word level j sits just before the j-th free coordinate.
    pub fn preimage_report(&self, p: &UniformFiniteTree) -> Result<SplittingReport, ForcingError> {
        let mut split_nodes = vec![];
        let mut lev = BTreeSet::new();
        for node in p.tree().splitting_nodes() {
            let a = self.coordinate(node.len() as u64);
            split_nodes.push(self.expand_to(&node, a)?);
            lev.insert(a + 1);
        }
        let h = p.terminal_len();
        let ht = if h == 0 {
            self.source.stem().len() as u64
        } else {
            self.coordinate(h - 1) + 1
        };
        let ratio = if ht == 0 {
            q(0, 1)
        } else {
            q(lev.len() as u64, ht)
        };
        Ok(SplittingReport {
            split_nodes,
            lev,
            ht,
            ratio,
        })
    }
}

/// Extends the condition with full cubes until the source-side splitting
/// ratio reaches `delta * (1 - 2^-k)`; `k = 0` asks for nothing and returns
/// the condition unchanged.  The search walks source coordinates up to
/// [`VALUE_HORIZON`] and reports failure beyond that.
pub fn densify(
    p: &UniformFiniteTree,
    delta: Q,
    k: u32,
    spine: &SpineMap,
) -> Result<UniformFiniteTree, ForcingError> {
    if k == 0 {
        return Ok(p.clone());
    }
    if k >= 32 {
        return Err(ForcingError::ExponentTooLarge(k));
    }
    if p.alphabet_size() != 2 {
        return Err(ForcingError::NotBinary(p.alphabet_size()));
    }
    let bound = delta * (q(1, 1) - q(1, 1u64 << k));
    let h0 = p.terminal_len();
    let base_lev = p.tree().lev().len() as u64;
    let mut frees: Vec<u64> = vec![];
    let mut n = 0u64;
    let grow_to = |frees: &mut Vec<u64>, want: usize, n: &mut u64| {
        while frees.len() < want && *n <= VALUE_HORIZON {
            if spine.source.value_at(*n).is_none() {
                frees.push(*n);
            }
            *n += 1;
        }
        frees.len() >= want
    };
    let mut h = h0.max(1);
    loop {
        if !grow_to(&mut frees, h as usize, &mut n) {
            return Err(ForcingError::DensityUnreachable {
                bound,
                value_horizon: VALUE_HORIZON,
            });
        }
        let ht = frees[h as usize - 1] + 1;
        let lev_count = base_lev + (h - h0);
        if q(lev_count, ht) >= bound {
            return p.extend_full(h - h0);
        }
        h += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::{splitting_report, CoalitionDescriptor, EventuallyPeriodicSeq};
    use std::collections::BTreeMap;

    fn cofinite_spine(start: u64) -> SpineMap {
        let free = CoalitionDescriptor::arith(start, 1);
        let tail = EventuallyPeriodicSeq::constant(Alphabet::Bounded(2), 1);
        let f = PartialAssignment::new(Alphabet::Bounded(2), free, BTreeMap::new(), tail).unwrap();
        SpineMap::new(f).unwrap()
    }

    fn full_spine() -> SpineMap {
        SpineMap::new(PartialAssignment::unconstrained(Alphabet::Bounded(2))).unwrap()
    }

    #[test]
    fn uniformity_is_enforced() {
        let tree = FiniteTree::new(2, vec![vec![0], vec![1, 0], vec![1, 1]]).unwrap();
        assert!(matches!(
            UniformFiniteTree::new(tree),
            Err(ForcingError::NonUniform)
        ));
        let empty = FiniteTree::new(2, Vec::<Vec<u64>>::new()).unwrap();
        assert!(matches!(
            UniformFiniteTree::new(empty),
            Err(ForcingError::EmptyCondition)
        ));
        let root = UniformFiniteTree::cube(2, 0).unwrap();
        assert_eq!(root.terminal_len(), 0);
        assert_eq!(root.tree().term().len(), 1);
    }

    #[test]
    fn threading_through_the_identity_changes_nothing() {
        let p = UniformFiniteTree::cube(2, 2).unwrap();
        let out = meet_dense(&p, &DenseOracle::identity()).unwrap();
        assert_eq!(out, p);
    }

    #[test]
    fn threading_lands_every_terminal_inside() {
        let p = UniformFiniteTree::cube(2, 1).unwrap();
        let out = meet_dense(&p, &DenseOracle::factor(vec![1, 1])).unwrap();
        assert_eq!(
            out.tree().term().to_vec(),
            vec![vec![0, 1, 1], vec![1, 1, 1]]
        );
        assert!(out.end_extends(&p));
    }

    #[test]
    fn the_shared_word_grows_only_when_a_terminal_needs_it() {
        let p = UniformFiniteTree::cube(2, 2).unwrap();
        let d = DenseOracle::factor(vec![0, 0]);
        let out = meet_dense(&p, &d).unwrap();
        assert_eq!(
            out.tree().term().to_vec(),
            vec![
                vec![0, 0, 0, 0],
                vec![0, 1, 0, 0],
                vec![1, 0, 0, 0],
                vec![1, 1, 0, 0],
            ]
        );
        assert!(out.tree().term().iter().all(|t| d.inside(t)));
        assert!(out.end_extends(&p));
    }

    #[test]
    fn iterated_threading_meets_a_whole_finite_family() {
        let family = vec![
            DenseOracle::factor(vec![1, 1]),
            DenseOracle::factor(vec![0, 0]),
            DenseOracle::factor(vec![1, 0, 1]),
        ];
        let mut p = UniformFiniteTree::cube(2, 2).unwrap();
        for d in &family {
            p = meet_dense(&p, d).unwrap();
        }
        for d in &family {
            assert!(p.tree().term().iter().all(|t| d.inside(t)));
        }
    }

    #[test]
    fn spine_translation_round_trips() {
        let spine = cofinite_spine(5);
        assert_eq!(spine.coordinate(0), 5);
        assert_eq!(spine.coordinate(3), 8);
        assert_eq!(spine.expand(&[]).unwrap(), vec![1, 1, 1, 1, 1]);
        assert_eq!(
            spine.expand(&[1, 0]).unwrap(),
            vec![1, 1, 1, 1, 1, 1, 0]
        );
        let t = spine.expand(&[0, 1, 1]).unwrap();
        assert_eq!(spine.collapse(&t), Some(vec![0, 1, 1]));
        assert_eq!(spine.collapse(&[0, 1, 1]), None);
    }

    #[test]
    fn preimage_statistics_match_a_materialized_source_tree() {
        let spine = cofinite_spine(5);
        let p = UniformFiniteTree::cube(2, 3).unwrap();
        let report = spine.preimage_report(&p).unwrap();
        assert_eq!(report.ht, 8);
        assert_eq!(report.lev, [6, 7, 8].into_iter().collect());
        assert_eq!(report.ratio, q(3, 8));
        let words: Vec<Vec<u64>> = p
            .tree()
            .term()
            .iter()
            .map(|t| spine.expand(t).unwrap())
            .collect();
        let source_tree = FiniteTree::new(2, words).unwrap();
        let direct = splitting_report(&source_tree).unwrap();
        assert_eq!(direct.lev, report.lev);
        assert_eq!(direct.ht, report.ht);
        assert_eq!(direct.ratio, report.ratio);
    }

    #[test]
    fn zero_steps_of_boosting_keep_the_condition() {
        let spine = full_spine();
        let p = UniformFiniteTree::cube(2, 2).unwrap();
        assert_eq!(densify(&p, q(1, 2), 0, &spine).unwrap(), p);
    }

    #[test]
    fn boosting_from_the_root_over_the_full_spine() {
        let spine = full_spine();
        let root = UniformFiniteTree::cube(2, 0).unwrap();
        let out = densify(&root, q(1, 2), 2, &spine).unwrap();
        let report = splitting_report(out.tree()).unwrap();
        assert!(report.ratio >= q(3, 8));
        assert_eq!(out.terminal_len(), 1);
    }

    #[test]
    fn boosted_ratios_climb_with_the_exponent() {
        let spine = cofinite_spine(5);
        let root = UniformFiniteTree::cube(2, 0).unwrap();
        let expected_len = [3u64, 7, 10, 12, 14, 15];
        let expected_ratio = [q(3, 8), q(7, 12), q(2, 3), q(12, 17), q(14, 19), q(3, 4)];
        let mut last = q(0, 1);
        for k in 1..=6u32 {
            let out = densify(&root, q(3, 4), k, &spine).unwrap();
            assert_eq!(out.terminal_len(), expected_len[k as usize - 1]);
            let report = spine.preimage_report(&out).unwrap();
            assert_eq!(report.ratio, expected_ratio[k as usize - 1]);
            let bound = q(3, 4) * (q(1, 1) - q(1, 1 << k));
            assert!(report.ratio >= bound);
            assert!(report.ratio >= last);
            last = report.ratio;
            assert!(out.end_extends(&root));
        }
    }

    #[test]
    fn boosting_checks_out_against_a_materialized_preimage() {
        let spine = cofinite_spine(5);
        let root = UniformFiniteTree::cube(2, 0).unwrap();
        let out = densify(&root, q(3, 4), 2, &spine).unwrap();
        let words: Vec<Vec<u64>> = out
            .tree()
            .term()
            .iter()
            .map(|t| spine.expand(t).unwrap())
            .collect();
        let direct = splitting_report(&FiniteTree::new(2, words).unwrap()).unwrap();
        let carried = spine.preimage_report(&out).unwrap();
        assert_eq!(direct.ratio, carried.ratio);
        assert_eq!(direct.lev, carried.lev);
    }

    #[test]
    fn too_sparse_a_spine_is_reported() {
        let free = CoalitionDescriptor::geom(1, 2);
        let tail = EventuallyPeriodicSeq::constant(Alphabet::Bounded(2), 0);
        let f = PartialAssignment::new(Alphabet::Bounded(2), free, BTreeMap::new(), tail).unwrap();
        let spine = SpineMap::new(f).unwrap();
        let root = UniformFiniteTree::cube(2, 0).unwrap();
        // the best this spine offers is 2 splits by coordinate 2, ratio 2/3
        let ok = densify(&root, q(3, 4), 3, &spine).unwrap();
        assert_eq!(spine.preimage_report(&ok).unwrap().ratio, q(2, 3));
        let err = densify(&root, q(3, 4), 5, &spine).unwrap_err();
        assert!(matches!(err, ForcingError::DensityUnreachable { .. }));
    }

    #[test]
    fn end_extension_rejects_a_dropped_branch() {
        let p = UniformFiniteTree::cube(2, 1).unwrap();
        let narrowed =
            UniformFiniteTree::new(FiniteTree::new(2, vec![vec![0, 0], vec![0, 1]]).unwrap())
                .unwrap();
        assert!(!narrowed.end_extends(&p));
        let widened = p.extend_full(1).unwrap();
        assert!(widened.end_extends(&p));
    }
}
