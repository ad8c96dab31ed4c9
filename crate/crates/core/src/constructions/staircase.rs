//! Staircase cylinders over unbounded-value streams and the two witness
//! constructions against them.
//!
//! A staircase stem is a word followed by a block of zeros whose length adds
//! up the word's entries plus a level index.  The n-th staircase union
//! collects the cylinders of all such stems.  Filling a condition's free
//! coordinates with zeros lands inside every level; answering each free
//! coordinate with a value larger than the next free coordinate escapes a
//! fixed level for good.

use thiserror::Error;

use crate::coalitions::finite_elements;
use crate::seqcore::{
    cylinder_member, Alphabet, AssignmentError, CoalitionDescriptor, EventuallyPeriodicSeq,
    Membership, NormalizeError, PartialAssignment,
};

#[derive(Debug, Error)]
pub enum StaircaseError {
    #[error("staircase words need a nonempty generator")]
    EmptyWord,
    #[error("escape values outgrow any bounded alphabet, found {0} symbols")]
    BoundedAlphabet(u64),
    #[error("the condition needs infinitely many free coordinates")]
    NotSilver,
    #[error("the condition has fewer than {needed} free coordinates")]
    NotEnoughFree { needed: u64 },
    #[error("depth {got} cannot hold the construction, {needed} is needed")]
    DepthTooSmall { needed: u64, got: u64 },
    #[error("infinitely many pinned zeros keep every stream captured")]
    ForeverZero,
    #[error("stage {stage} left a staircase stem compatible")]
    StageCheckFailed { stage: u64 },
    #[error("a zero at {position} lets the stream be captured")]
    CaptureCheckFailed { position: u64 },
    #[error("level {level} membership fails at coordinate {coordinate}")]
    VerificationFailed { level: u64, coordinate: u64 },
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
}

/// A block of `n` zeros.
pub fn e_word(n: u64) -> Vec<u64> {
    vec![0; n as usize]
}

/// The staircase stem generated by a word at a level: the word minus its
/// last entry, one zero block per listed entry, and `level` more zeros.
pub fn h_map(level: u64, word: &[u64]) -> Result<Vec<u64>, StaircaseError> {
    let (&last, body) = word.split_last().ok_or(StaircaseError::EmptyWord)?;
    let mut out = body.to_vec();
    for &v in body {
        out.extend(e_word(v));
    }
    out.extend(e_word(last));
    out.extend(e_word(level));
    Ok(out)
}

/// Membership verdict for one staircase union; a refutation only speaks for
/// generators within the echoed bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CnMembership {
    Inside { generator: Vec<u64>, stem: Vec<u64> },
    OutsideUpToBounds { stem_bound: u64, value_bound: u64 },
}

/// Decides whether `x` lies in the level-`n` staircase union, looking at
/// generators whose stem fits under `stem_bound` and whose entries stay
/// under `value_bound`.
///
/// A stream is captured by a generator exactly when that generator is one of
/// the stream's own prefixes followed by a small entry, so the scan walks
/// prefix lengths instead of enumerating words; a trailing entry of zero
/// dominates every larger one.  No coordinate at or past `stem_bound` is
/// ever read, so the verdict is sound for any continuation of the stream.
pub fn in_cn(x: &EventuallyPeriodicSeq, n: u64, stem_bound: u64, value_bound: u64) -> CnMembership {
    let refusal = CnMembership::OutsideUpToBounds {
        stem_bound,
        value_bound,
    };
    if value_bound == 0 {
        return refusal;
    }
    let mut sum = 0u64;
    for prefix_len in 0..=stem_bound {
        let need = match prefix_len.checked_add(sum).and_then(|s| s.checked_add(n)) {
            Some(need) => need,
            None => break,
        };
        if need > stem_bound {
            break;
        }
        if (prefix_len..need).all(|i| x.eval(i) == 0) {
            let mut generator = x.window(prefix_len);
            generator.push(0);
            let stem = h_map(n, &generator).expect("the generator is nonempty");
            return CnMembership::Inside { generator, stem };
        }
        let v = x.eval(prefix_len);
        if v >= value_bound {
            break;
        }
        sum = match sum.checked_add(v) {
            Some(s) => s,
            None => break,
        };
    }
    refusal
}

/// Pins the next `|t|` free coordinates of `f`, in increasing order, to the
/// entries of `t`.
pub fn oplus(f: &PartialAssignment, t: &[u64]) -> Result<PartialAssignment, StaircaseError> {
    let mut out = f.clone();
    for (offset, &v) in t.iter().enumerate() {
        let coord = out.nth_free(0).ok_or(StaircaseError::NotEnoughFree {
            needed: t.len() as u64 - offset as u64,
        })?;
        out = out.with_value(coord, v)?;
    }
    Ok(out)
}

/// A finite stream prefix that answers every free coordinate with a value
/// too large for the staircase stems enumerated below its level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EscapeWitness {
    pub prefix: Vec<u64>,
    pub n: u64,
    /// Free coordinates at which the stagewise avoidance was confirmed.
    pub boundaries: Vec<u64>,
}

impl EscapeWitness {
    /// The prefix as a stream; the tail is a placeholder of ones, so only
    /// conclusions that read below the prefix length are meaningful.
    pub fn as_stream(&self) -> EventuallyPeriodicSeq {
        EventuallyPeriodicSeq::new(Alphabet::Unbounded, self.prefix.clone(), vec![1])
            .expect("unbounded alphabet admits everything")
    }
}

fn require_unbounded(f: &PartialAssignment) -> Result<(), StaircaseError> {
    match f.alphabet() {
        Alphabet::Unbounded => Ok(()),
        Alphabet::Bounded(k) => Err(StaircaseError::BoundedAlphabet(k)),
    }
}

// Answers every free coordinate below `depth` with two more than the next
// free coordinate; pinned coordinates keep their values.
fn jump_prefix(f: &PartialAssignment, depth: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(depth as usize);
    let mut free_seen = 0u64;
    for i in 0..depth {
        match f.value_at(i) {
            Some(v) => out.push(v),
            None => {
                free_seen += 1;
                let next = f
                    .nth_free(free_seen)
                    .expect("a silver condition never runs out of free coordinates");
                out.push(next + 2);
            }
        }
    }
    out
}

// No staircase stem of level `n` generated by fewer than `boundary` entries
// stays compatible with `t`: below every admissible cut the zero block the
// stem demands meets a nonzero entry of `t`.
fn avoids_short_stems(t: &[u64], boundary: u64, n: u64) -> bool {
    if boundary < 2 {
        return true;
    }
    let mut sum = 0u64;
    for cut in 0..=(boundary - 2).min(t.len() as u64) {
        let end = cut
            .checked_add(sum)
            .and_then(|s| s.checked_add(n))
            .unwrap_or(u64::MAX)
            .min(t.len() as u64);
        if (cut..end).all(|i| t[i as usize] == 0) {
            return false;
        }
        if let Some(&v) = t.get(cut as usize) {
            sum = sum.saturating_add(v);
        }
    }
    true
}

/// Builds a prefix of a stream through `f` that stays out of the staircase
/// union at level `n = a0 + 2`, where `a0` is the first free coordinate.
/// Each stage is confirmed mechanically rather than taken on faith.
pub fn escape_witness(f: &PartialAssignment, depth: u64) -> Result<EscapeWitness, StaircaseError> {
    require_unbounded(f)?;
    if !f.is_silver() {
        return Err(StaircaseError::NotSilver);
    }
    let a0 = f.nth_free(0).expect("silver conditions have free coordinates");
    let a1 = f.nth_free(1).expect("silver conditions have free coordinates");
    if depth < a1 {
        return Err(StaircaseError::DepthTooSmall {
            needed: a1,
            got: depth,
        });
    }
    let n = a0 + 2;
    let prefix = jump_prefix(f, depth);
    let mut boundaries = vec![];
    let mut m = 1u64;
    let mut previous = a0;
    while let Some(a) = f.nth_free(m) {
        if a > depth {
            break;
        }
        if !avoids_short_stems(&prefix[..a as usize], previous, n) {
            return Err(StaircaseError::StageCheckFailed { stage: m });
        }
        boundaries.push(a);
        previous = a;
        m += 1;
    }
    Ok(EscapeWitness {
        prefix,
        n,
        boundaries,
    })
}

// Coordinates that `f` pins to zero, or the error when there are infinitely
// many of them.
fn pinned_zeros(f: &PartialAssignment) -> Result<Vec<u64>, StaircaseError> {
    let tail = f.tail_rule();
    let plen = tail.prefix().len();
    let mut zero_tail = CoalitionDescriptor::finite(
        (0..plen as u64).filter(|&i| tail.prefix()[i as usize] == 0),
    );
    for (r, &v) in tail.period().iter().enumerate() {
        if v == 0 {
            zero_tail = zero_tail.union(CoalitionDescriptor::arith(
                plen as u64 + r as u64,
                tail.period().len() as u64,
            ));
        }
    }
    let explicit_keys = CoalitionDescriptor::finite(f.explicit().keys().copied());
    let beyond = zero_tail
        .intersection(f.free().clone().complement())
        .intersection(explicit_keys.complement());
    let tail_zeros = finite_elements(&beyond)?.ok_or(StaircaseError::ForeverZero)?;
    let mut zeros: Vec<u64> = f
        .explicit()
        .iter()
        .filter(|&(_, &v)| v == 0)
        .map(|(&c, _)| c)
        .collect();
    zeros.extend(tail_zeros);
    zeros.sort_unstable();
    Ok(zeros)
}

/// A prefix certifying a stream through `f` outside the level-`n` capture
/// set, with `n` chosen past both the first free coordinate and the number
/// of zeros `f` pins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutsideWitness {
    pub prefix: Vec<u64>,
    pub n: u64,
}

impl OutsideWitness {
    /// The prefix as a stream; see [`EscapeWitness::as_stream`].
    pub fn as_stream(&self) -> EventuallyPeriodicSeq {
        EventuallyPeriodicSeq::new(Alphabet::Unbounded, self.prefix.clone(), vec![1])
            .expect("unbounded alphabet admits everything")
    }
}

/// Builds a stream prefix through `f` outside the capture set at its level.
///
/// A stream is captured at level `n` exactly when some position holds a zero
/// and at least `n` zeros plus the sum of the earlier values follow it; the
/// jump answers make that sum enormous while `n` exceeds the total number of
/// zeros the stream will ever carry.  Every zero must land below `depth` so
/// the count is exact, and the first `levels` stages are audited the same
/// way as in [`escape_witness`].  Conditions pinning infinitely many zeros
/// are refused: they capture all of their streams outright.
pub fn witness_out_f(
    f: &PartialAssignment,
    levels: u64,
    depth: u64,
) -> Result<OutsideWitness, StaircaseError> {
    require_unbounded(f)?;
    if !f.is_silver() {
        return Err(StaircaseError::NotSilver);
    }
    let zeros = pinned_zeros(f)?;
    let a0 = f.nth_free(0).expect("silver conditions have free coordinates");
    let a1 = f.nth_free(1).expect("silver conditions have free coordinates");
    let needed = a1.max(zeros.last().map_or(0, |&z| z + 1));
    if depth < needed {
        return Err(StaircaseError::DepthTooSmall {
            needed,
            got: depth,
        });
    }
    let n = (a0 + 2).max(zeros.len() as u64 + 1);
    let prefix = jump_prefix(f, depth);
    let mut sum = 0u64;
    let mut zeros_behind = 0u64;
    let total_zeros = prefix.iter().filter(|&&v| v == 0).count() as u64;
    for (p, &v) in prefix.iter().enumerate() {
        if v == 0 {
            let from_here = total_zeros - zeros_behind;
            if from_here >= sum.saturating_add(n) {
                return Err(StaircaseError::CaptureCheckFailed { position: p as u64 });
            }
            zeros_behind += 1;
        }
        sum = sum.saturating_add(v);
    }
    let mut previous = a0;
    for m in 1..=levels {
        let a = match f.nth_free(m) {
            Some(a) if a <= depth => a,
            _ => break,
        };
        if !avoids_short_stems(&prefix[..a as usize], previous, n) {
            return Err(StaircaseError::StageCheckFailed { stage: m });
        }
        previous = a;
    }
    Ok(OutsideWitness { prefix, n })
}

// The level-`lvl` graft through `g`: one zero block per value pinned up to
// and including the first free coordinate of `f`, then `lvl` more zeros.
fn graft(f: &PartialAssignment, lvl: u64) -> Result<PartialAssignment, StaircaseError> {
    let a0 = f.nth_free(0).ok_or(StaircaseError::NotSilver)?;
    let g = f.with_value(a0, 0)?;
    let mut word = vec![];
    for i in 0..=a0 {
        let v = g
            .value_at(i)
            .expect("everything up to the first free coordinate is pinned");
        word.extend(e_word(v));
    }
    word.extend(e_word(lvl));
    oplus(&g, &word)
}

/// Fills every free coordinate of `f` with zero and confirms the result sits
/// inside the capture set at each level below `levels`; a failed check means
/// a bug, not a property of `f`.
pub fn witness_in_f(
    f: &PartialAssignment,
    levels: u64,
) -> Result<EventuallyPeriodicSeq, StaircaseError> {
    let x = f.fill(0)?;
    for lvl in 0..levels {
        let pinned = graft(f, lvl)?;
        let check_depth = pinned
            .explicit()
            .keys()
            .next_back()
            .map_or(1, |&c| c + 1);
        match cylinder_member(&x, &pinned.cylinder(), check_depth)? {
            Membership::AgreesToDepth(_) => {}
            Membership::DisagreesAt(coordinate) => {
                return Err(StaircaseError::VerificationFailed {
                    level: lvl,
                    coordinate,
                })
            }
        }
    }
    Ok(x)
}

/// The value bound that admits everything the inputs mention: the depth, the
/// pinned values, and the tail rule's values, plus slack for the jumps.
pub fn default_value_bound(f: &PartialAssignment, depth: u64) -> u64 {
    let explicit_max = f.explicit().values().copied().max().unwrap_or(0);
    let tail = f.tail_rule();
    let tail_max = tail
        .prefix()
        .iter()
        .chain(tail.period())
        .copied()
        .max()
        .unwrap_or(0);
    depth.max(explicit_max).max(tail_max) + 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::Cylinder;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn unconstrained() -> PartialAssignment {
        PartialAssignment::unconstrained(Alphabet::Unbounded)
    }

    fn pin_evens_to(v: u64) -> PartialAssignment {
        PartialAssignment::new(
            Alphabet::Unbounded,
            CoalitionDescriptor::arith(1, 2),
            BTreeMap::new(),
            EventuallyPeriodicSeq::constant(Alphabet::Unbounded, v),
        )
        .unwrap()
    }

    fn stream(prefix: Vec<u64>, period: Vec<u64>) -> EventuallyPeriodicSeq {
        EventuallyPeriodicSeq::new(Alphabet::Unbounded, prefix, period).unwrap()
    }

    #[test]
    fn zero_blocks() {
        assert_eq!(e_word(0), Vec::<u64>::new());
        assert_eq!(e_word(3), vec![0, 0, 0]);
    }

    #[test]
    fn staircase_stems_frozen() {
        assert_eq!(h_map(0, &[4]).unwrap(), vec![0, 0, 0, 0]);
        assert_eq!(h_map(0, &[2, 3]).unwrap(), vec![2, 0, 0, 0, 0, 0]);
        assert_eq!(h_map(2, &[1]).unwrap(), vec![0, 0, 0]);
        assert_eq!(h_map(1, &[0]).unwrap(), vec![0]);
        assert!(matches!(h_map(0, &[]), Err(StaircaseError::EmptyWord)));
    }

    #[test]
    fn the_zero_stream_is_captured_at_once() {
        let x = EventuallyPeriodicSeq::constant(Alphabet::Unbounded, 0);
        assert_eq!(
            in_cn(&x, 1, 10, 10),
            CnMembership::Inside {
                generator: vec![0],
                stem: vec![0],
            }
        );
    }

    #[test]
    fn a_spike_then_zeros_is_captured_behind_the_spike() {
        let x = stream(vec![3], vec![0]);
        assert_eq!(
            in_cn(&x, 1, 10, 10),
            CnMembership::Inside {
                generator: vec![3, 0],
                stem: vec![3, 0, 0, 0, 0],
            }
        );
    }

    #[test]
    fn the_all_ones_stream_stays_outside() {
        let x = EventuallyPeriodicSeq::constant(Alphabet::Unbounded, 1);
        assert_eq!(
            in_cn(&x, 1, 50, 50),
            CnMembership::OutsideUpToBounds {
                stem_bound: 50,
                value_bound: 50,
            }
        );
    }

    #[test]
    fn bounds_cut_the_scan_where_promised() {
        let x = stream(vec![3], vec![0]);
        assert!(matches!(
            in_cn(&x, 1, 0, 10),
            CnMembership::OutsideUpToBounds { .. }
        ));
        assert!(matches!(
            in_cn(&x, 1, 10, 0),
            CnMembership::OutsideUpToBounds { .. }
        ));
        // the spike is too big an entry, so its prefix is out of scope
        assert!(matches!(
            in_cn(&x, 1, 10, 3),
            CnMembership::OutsideUpToBounds { .. }
        ));
        assert!(matches!(
            in_cn(&x, 1, 10, 4),
            CnMembership::Inside { .. }
        ));
    }

    #[test]
    fn grafting_pins_free_coordinates_in_order() {
        let f = pin_evens_to(0);
        let g = oplus(&f, &[5, 7]).unwrap();
        assert_eq!(g.value_at(1), Some(5));
        assert_eq!(g.value_at(3), Some(7));
        assert_eq!(g.value_at(5), None);
        assert_eq!(g.value_at(0), Some(0));
    }

    #[test]
    fn empty_graft_changes_nothing() {
        let f = pin_evens_to(2);
        let g = oplus(&f, &[]).unwrap();
        for i in 0..40 {
            assert_eq!(g.value_at(i), f.value_at(i));
        }
    }

    #[test]
    fn grafting_concatenation_splits_into_stages() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let start = rng.gen_range(0..3);
            let step = rng.gen_range(1..4);
            let f = PartialAssignment::new(
                Alphabet::Unbounded,
                CoalitionDescriptor::arith(start, step),
                BTreeMap::new(),
                EventuallyPeriodicSeq::constant(Alphabet::Unbounded, rng.gen_range(1..5)),
            )
            .unwrap();
            let s: Vec<u64> = (0..rng.gen_range(0..4)).map(|_| rng.gen_range(0..8)).collect();
            let t: Vec<u64> = (0..rng.gen_range(0..4)).map(|_| rng.gen_range(0..8)).collect();
            let mut both = s.clone();
            both.extend(&t);
            let one_shot = oplus(&f, &both).unwrap();
            let staged = oplus(&oplus(&f, &s).unwrap(), &t).unwrap();
            for i in 0..100 {
                assert_eq!(one_shot.value_at(i), staged.value_at(i));
            }
        }
    }

    #[test]
    fn grafting_runs_out_on_a_finite_free_set() {
        let f = PartialAssignment::new(
            Alphabet::Unbounded,
            CoalitionDescriptor::finite([2, 4]),
            BTreeMap::new(),
            EventuallyPeriodicSeq::constant(Alphabet::Unbounded, 1),
        )
        .unwrap();
        assert!(matches!(
            oplus(&f, &[1, 2, 3]),
            Err(StaircaseError::NotEnoughFree { needed: 1 })
        ));
    }

    #[test]
    fn escape_from_the_unconstrained_condition() {
        let w = escape_witness(&unconstrained(), 8).unwrap();
        assert_eq!(w.n, 2);
        assert_eq!(w.prefix, vec![3, 4, 5, 6, 7, 8, 9, 10]);
        assert_eq!(
            in_cn(&w.as_stream(), w.n, 8, 20),
            CnMembership::OutsideUpToBounds {
                stem_bound: 8,
                value_bound: 20,
            }
        );
        let f = unconstrained();
        assert_eq!(
            cylinder_member(&w.as_stream(), &f.cylinder(), 8).unwrap(),
            Membership::AgreesToDepth(8)
        );
    }

    #[test]
    fn escape_respects_the_stem() {
        let f = PartialAssignment::new(
            Alphabet::Unbounded,
            CoalitionDescriptor::finite([0]).complement(),
            BTreeMap::from([(0, 5)]),
            EventuallyPeriodicSeq::constant(Alphabet::Unbounded, 0),
        )
        .unwrap();
        let w = escape_witness(&f, 6).unwrap();
        assert_eq!(w.n, 3);
        assert_eq!(w.prefix, vec![5, 4, 5, 6, 7, 8]);
    }

    #[test]
    fn escape_with_pinned_evens() {
        let f = pin_evens_to(1);
        let depth = 40;
        let w = escape_witness(&f, depth).unwrap();
        assert_eq!(w.n, 3);
        assert_eq!(&w.prefix[..6], &[1, 5, 1, 7, 1, 9]);
        assert!(matches!(
            in_cn(&w.as_stream(), w.n, depth, default_value_bound(&f, depth)),
            CnMembership::OutsideUpToBounds { .. }
        ));
        assert_eq!(
            cylinder_member(&w.as_stream(), &f.clone().cylinder(), depth).unwrap(),
            Membership::AgreesToDepth(depth)
        );
        assert!(!w.boundaries.is_empty());
    }

    #[test]
    fn escape_guards_its_inputs() {
        assert!(matches!(
            escape_witness(&unconstrained(), 0),
            Err(StaircaseError::DepthTooSmall { needed: 1, got: 0 })
        ));
        let bounded = PartialAssignment::unconstrained(Alphabet::Bounded(2));
        assert!(matches!(
            escape_witness(&bounded, 10),
            Err(StaircaseError::BoundedAlphabet(2))
        ));
    }

    #[test]
    fn filling_with_zeros_lands_inside_every_level() {
        let x = witness_in_f(&unconstrained(), 5).unwrap();
        assert_eq!(x.window(6), vec![0; 6]);
        let f = PartialAssignment::new(
            Alphabet::Bounded(2),
            CoalitionDescriptor::arith(1, 2),
            BTreeMap::new(),
            EventuallyPeriodicSeq::constant(Alphabet::Bounded(2), 1),
        )
        .unwrap();
        let y = witness_in_f(&f, 5).unwrap();
        assert_eq!(y.window(6), vec![1, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn the_two_witnesses_part_ways_at_the_first_free_coordinate() {
        let f = pin_evens_to(1);
        let inside = witness_in_f(&f, 4).unwrap();
        let outside = witness_out_f(&f, 3, 30).unwrap();
        assert_eq!(outside.n, 3);
        assert_eq!(inside.eval(1), 0);
        assert_eq!(outside.prefix[1], 5);
        assert_eq!(
            cylinder_member(&outside.as_stream(), &f.cylinder(), 30).unwrap(),
            Membership::AgreesToDepth(30)
        );
    }

    #[test]
    fn permanently_zero_pins_are_refused() {
        let f = pin_evens_to(0);
        assert!(matches!(
            witness_out_f(&f, 2, 30),
            Err(StaircaseError::ForeverZero)
        ));
    }

    #[test]
    fn finitely_many_zero_pins_raise_the_level() {
        let f = PartialAssignment::new(
            Alphabet::Unbounded,
            CoalitionDescriptor::finite([0, 2]).complement(),
            BTreeMap::from([(0, 0), (2, 0)]),
            EventuallyPeriodicSeq::constant(Alphabet::Unbounded, 1),
        )
        .unwrap();
        let w = witness_out_f(&f, 2, 10).unwrap();
        assert_eq!(w.n, 3);
        assert_eq!(w.prefix, vec![0, 5, 0, 6, 7, 8, 9, 10, 11, 12]);
    }

    #[test]
    fn witness_depth_must_cover_every_pinned_zero() {
        let f = PartialAssignment::new(
            Alphabet::Unbounded,
            CoalitionDescriptor::finite([8]).complement(),
            BTreeMap::from([(8, 0)]),
            EventuallyPeriodicSeq::constant(Alphabet::Unbounded, 1),
        )
        .unwrap();
        assert!(matches!(
            witness_out_f(&f, 2, 5),
            Err(StaircaseError::DepthTooSmall { needed: 9, got: 5 })
        ));
    }

    #[test]
    fn seeded_conditions_support_both_witnesses() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for round in 0..20 {
            let start = rng.gen_range(0..3);
            let step = rng.gen_range(1..4);
            let free = CoalitionDescriptor::arith(start, step);
            let mut explicit = BTreeMap::new();
            for c in 0..start {
                explicit.insert(c, rng.gen_range(1..6));
            }
            let f = PartialAssignment::new(
                Alphabet::Unbounded,
                free,
                explicit,
                EventuallyPeriodicSeq::constant(Alphabet::Unbounded, rng.gen_range(1..4)),
            )
            .unwrap();
            let depth = 30;
            let inside = witness_in_f(&f, 4).unwrap();
            let outside = witness_out_f(&f, 3, depth).unwrap();
            assert_eq!(
                cylinder_member(&inside, &f.clone().cylinder(), depth).unwrap(),
                Membership::AgreesToDepth(depth),
                "round {round}"
            );
            assert_eq!(
                cylinder_member(&outside.as_stream(), &f.clone().cylinder(), depth).unwrap(),
                Membership::AgreesToDepth(depth),
                "round {round}"
            );
            let split = (0..depth).find(|&i| inside.eval(i) != outside.prefix[i as usize]);
            assert!(split.is_some(), "round {round}: witnesses never part ways");
            let esc = escape_witness(&f, depth).unwrap();
            assert!(matches!(
                in_cn(&esc.as_stream(), esc.n, depth, default_value_bound(&f, depth)),
                CnMembership::OutsideUpToBounds { .. }
            ));
        }
    }

    #[test]
    fn capture_criterion_cross_checks_the_union_scan() {
        // streams with a zero followed by enough zeros are exactly the
        // captured ones, provided the scan bounds cover the prefix
        let caught = stream(vec![2, 1, 0, 0, 0, 0], vec![1]);
        assert!(matches!(in_cn(&caught, 1, 20, 20), CnMembership::Inside { .. }));
        let starved = stream(vec![2, 1, 0, 0, 0, 1], vec![1]);
        assert!(matches!(
            in_cn(&starved, 1, 6, 20),
            CnMembership::OutsideUpToBounds { .. }
        ));
    }

    #[test]
    fn verification_depth_reaches_past_the_graft() {
        // the level-3 graft on the unconstrained condition pins coordinates
        // 0..=3 to zero; a stream breaking one of them must be flagged
        let g = graft(&unconstrained(), 3).unwrap();
        let c: Cylinder = g.cylinder();
        let bad = stream(vec![0, 0, 0, 1], vec![0]);
        assert_eq!(
            cylinder_member(&bad, &c, 4).unwrap(),
            Membership::DisagreesAt(3)
        );
    }
}
