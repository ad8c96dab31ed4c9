//! Block decomposition of a binary selector and the utility maps it induces.
//!
//! The ones of a selector, enumerated ascending, cut the axis into
//! consecutive blocks between one and the next.  Under the paired grain each
//! selector coordinate spans two utility coordinates, so block `k` covers
//! `[2 n_k, 2 n_{k+1})`; under unit grain it covers `[n_k, n_{k+1})`.
//! Coordinates before the first block form the initial segment.  The two
//! canonical maps value a coordinate by whether its block index is even or
//! odd: the favored side gets the inner levels, the other side and the
//! initial segment get the outer ones.

use super::{scale, SwrError, UtilityStream, Variant};
use crate::seqcore::{Alphabet, CoalitionDescriptor, EventuallyPeriodicSeq};

/// Where a coordinate lands in the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// Before the first block.
    Initial,
    /// Inside the block with this index.
    Block(u64),
}

/// A selector with precomputed counting tables for its ones.
#[derive(Debug, Clone)]
pub struct Decomposition {
    paired: bool,
    selector: UtilityStream,
    prefix_cum: Vec<u64>,
    prefix_pos: Vec<u64>,
    period_cum: Vec<u64>,
    period_pos: Vec<u64>,
    /// The selector's ones as a coalition.
    pub ones: CoalitionDescriptor,
    /// Union of the even-indexed blocks.
    pub even_part: CoalitionDescriptor,
    /// Union of the odd-indexed blocks.
    pub odd_part: CoalitionDescriptor,
}

/// Cut the axis along the ones of `x`; fails on non-binary selectors and on
/// selectors with finitely many ones.
pub fn decompose(x: &UtilityStream, paired: bool) -> Result<Decomposition, SwrError> {
    if x.alphabet() != Alphabet::Bounded(2) {
        return Err(SwrError::NotBinary);
    }
    if x.period().iter().all(|&b| b == 0) {
        return Err(SwrError::FinitelyManyOnes);
    }
    let tally = |word: &[u64]| {
        let mut cum = Vec::with_capacity(word.len());
        let mut pos = Vec::new();
        let mut acc = 0;
        for (i, &b) in word.iter().enumerate() {
            if b == 1 {
                acc += 1;
                pos.push(i as u64);
            }
            cum.push(acc);
        }
        (cum, pos)
    };
    let (prefix_cum, prefix_pos) = tally(x.prefix());
    let (period_cum, period_pos) = tally(x.period());
    let ones = CoalitionDescriptor::periodic(x.prefix().to_vec(), x.period().to_vec());
    let empty = CoalitionDescriptor::finite(Vec::<u64>::new());
    let mut dec = Decomposition {
        paired,
        selector: x.clone(),
        prefix_cum,
        prefix_pos,
        period_cum,
        period_pos,
        ones,
        even_part: empty.clone(),
        odd_part: empty,
    };
    let (even_part, odd_part) = dec.parity_parts();
    dec.even_part = even_part;
    dec.odd_part = odd_part;
    Ok(dec)
}

impl Decomposition {
    pub fn paired(&self) -> bool {
        self.paired
    }

    pub fn selector(&self) -> &UtilityStream {
        &self.selector
    }

    fn grain(&self) -> u64 {
        if self.paired {
            2
        } else {
            1
        }
    }

    /// Ones of the selector in the closed interval `[0, m]`.
    fn ones_le(&self, m: u64) -> u64 {
        let plen = self.selector.prefix().len() as u64;
        if m < plen {
            return self.prefix_cum[m as usize];
        }
        let slots = m - plen + 1;
        let per = self.selector.period().len() as u64;
        let prefix_total = self.prefix_cum.last().copied().unwrap_or(0);
        let period_total = *self.period_cum.last().expect("period is nonempty");
        let partial = match slots % per {
            0 => 0,
            rem => self.period_cum[rem as usize - 1],
        };
        prefix_total + (slots / per) * period_total + partial
    }

    /// Position of the `k`-th one of the selector.
    pub fn boundary(&self, k: u64) -> u64 {
        let k0 = self.prefix_pos.len() as u64;
        if k < k0 {
            return self.prefix_pos[k as usize];
        }
        let q = k - k0;
        let r = self.period_pos.len() as u64;
        let plen = self.selector.prefix().len() as u64;
        let per = self.selector.period().len() as u64;
        plen + (q / r) * per + self.period_pos[(q % r) as usize]
    }

    /// Utility-space interval covered by block `k`, half open.
    pub fn block(&self, k: u64) -> (u64, u64) {
        (
            self.grain() * self.boundary(k),
            self.grain() * self.boundary(k + 1),
        )
    }

    /// End of the initial segment, equal to the start of block zero.
    pub fn initial_end(&self) -> u64 {
        self.grain() * self.boundary(0)
    }

    pub fn region(&self, n: u64) -> Region {
        match self.ones_le(n / self.grain()) {
            0 => Region::Initial,
            c => Region::Block(c - 1),
        }
    }

    /// Enumeration index of a selector one, if there is one at `m`.
    pub fn index_of(&self, m: u64) -> Option<u64> {
        if self.selector.eval(m) == 1 {
            Some(self.ones_le(m) - 1)
        } else {
            None
        }
    }

    /// Coordinate count after which regions repeat, and the repeat length.
    fn stable_window(&self) -> (u64, u64) {
        let k0 = self.prefix_pos.len() as u64;
        let start = self.grain() * self.boundary(k0);
        let r = self.period_pos.len() as u64;
        let p = self.selector.period().len() as u64;
        let doubling = if r % 2 == 0 { 1 } else { 2 };
        (start, self.grain() * p * doubling)
    }

    fn parity_parts(&self) -> (CoalitionDescriptor, CoalitionDescriptor) {
        let (start, cycle) = self.stable_window();
        let bit = |n: u64, odd: bool| match self.region(n) {
            Region::Block(k) if (k % 2 == 1) == odd => 1,
            _ => 0,
        };
        let make = |odd: bool| {
            let prefix = (0..start).map(|n| bit(n, odd)).collect();
            let period = (start..start + cycle).map(|n| bit(n, odd)).collect();
            CoalitionDescriptor::periodic(prefix, period)
        };
        (make(false), make(true))
    }

    fn map_values(&self, favor_even: bool) -> UtilityStream {
        let (start, cycle) = self.stable_window();
        let value = |n: u64| {
            let inner = match self.region(n) {
                Region::Initial => false,
                Region::Block(k) => (k % 2 == 0) == favor_even,
            };
            if self.paired {
                match (inner, n % 2 == 0) {
                    (true, true) => scale::B,
                    (true, false) => scale::C,
                    (false, true) => scale::A,
                    (false, false) => scale::D,
                }
            } else {
                inner as u64
            }
        };
        let alphabet = Alphabet::Bounded(if self.paired { 4 } else { 2 });
        let prefix = (0..start).map(value).collect();
        let period = (start..start + cycle).map(value).collect();
        EventuallyPeriodicSeq::new(alphabet, prefix, period).expect("levels fit the alphabet")
    }

    /// The map putting the inner levels on even-indexed blocks.
    pub fn favor_even_map(&self) -> UtilityStream {
        self.map_values(true)
    }

    /// The map putting the inner levels on odd-indexed blocks.
    pub fn favor_odd_map(&self) -> UtilityStream {
        self.map_values(false)
    }
}

/// The two canonical utility maps of a selector, even-favoring first.
pub fn oe_maps(
    x: &UtilityStream,
    variant: Variant,
) -> Result<(UtilityStream, UtilityStream), SwrError> {
    let dec = decompose(x, variant.paired())?;
    Ok((dec.favor_even_map(), dec.favor_odd_map()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::EventuallyPeriodicSeq;

    fn selector(prefix: &[u64], period: &[u64]) -> UtilityStream {
        EventuallyPeriodicSeq::binary(prefix.to_vec(), period.to_vec()).unwrap()
    }

    #[test]
    fn all_ones_paired_has_width_two_blocks() {
        let dec = decompose(&selector(&[], &[1]), true).unwrap();
        for k in 0..5 {
            assert_eq!(dec.boundary(k), k);
            assert_eq!(dec.block(k), (2 * k, 2 * k + 2));
        }
        assert_eq!(dec.initial_end(), 0);
        for n in [0, 1, 4, 5, 8, 9] {
            assert!(dec.even_part.contains(n), "even part misses {n}");
        }
        for n in [2, 3, 6, 7, 10, 11] {
            assert!(dec.odd_part.contains(n), "odd part misses {n}");
        }
    }

    #[test]
    fn alternating_selector_matches_the_hand_blocks() {
        let dec = decompose(&selector(&[], &[0, 1]), true).unwrap();
        for k in 0..4 {
            assert_eq!(dec.boundary(k), 2 * k + 1);
            assert_eq!(dec.block(k), (4 * k + 2, 4 * k + 6));
        }
        assert_eq!(dec.initial_end(), 2);
        assert_eq!(dec.region(0), Region::Initial);
        assert_eq!(dec.region(1), Region::Initial);
        assert_eq!(dec.region(2), Region::Block(0));
        assert_eq!(dec.region(6), Region::Block(1));
        for n in [2, 3, 4, 5, 10, 11, 12, 13] {
            assert!(dec.even_part.contains(n));
        }
        for n in [0, 1, 6, 7, 8, 9, 14, 15] {
            assert!(!dec.even_part.contains(n));
        }
    }

    #[test]
    fn unit_grain_gives_unit_blocks() {
        let dec = decompose(&selector(&[], &[1]), false).unwrap();
        for k in 0..6 {
            assert_eq!(dec.block(k), (k, k + 1));
        }
        for n in 0..20 {
            assert_eq!(dec.even_part.contains(n), n % 2 == 0);
            assert_eq!(dec.odd_part.contains(n), n % 2 == 1);
        }
    }

    #[test]
    fn enumeration_indices_follow_the_ones() {
        let dec = decompose(&selector(&[], &[0, 1]), true).unwrap();
        assert_eq!(dec.index_of(1), Some(0));
        assert_eq!(dec.index_of(3), Some(1));
        assert_eq!(dec.index_of(0), None);
        let gap = decompose(&selector(&[1, 1, 1, 0], &[1]), true).unwrap();
        assert_eq!(gap.index_of(2), Some(2));
        assert_eq!(gap.index_of(3), None);
        assert_eq!(gap.index_of(4), Some(3));
    }

    #[test]
    fn maps_of_the_all_ones_selector() {
        let (o, e) = oe_maps(&selector(&[], &[1]), Variant::EquityAnonymity).unwrap();
        assert_eq!(o.prefix(), &[] as &[u64]);
        assert_eq!(o.period(), &[1, 2, 0, 3]);
        assert_eq!(e.prefix(), &[] as &[u64]);
        assert_eq!(e.period(), &[0, 3, 1, 2]);
    }

    #[test]
    fn maps_of_the_alternating_selector() {
        let (o, e) = oe_maps(&selector(&[], &[0, 1]), Variant::EquityAnonymity).unwrap();
        assert_eq!(o.prefix(), &[0, 3]);
        assert_eq!(o.period(), &[1, 2, 1, 2, 0, 3, 0, 3]);
        assert_eq!(e.prefix(), &[0, 3]);
        assert_eq!(e.period(), &[0, 3, 0, 3, 1, 2, 1, 2]);
    }

    #[test]
    fn maps_of_a_selector_with_one_gap() {
        let (o, e) = oe_maps(&selector(&[1, 1, 1, 0], &[1]), Variant::EquityAnonymity).unwrap();
        assert_eq!(o.prefix(), &[1, 2, 0, 3, 1, 2, 1, 2]);
        assert_eq!(o.period(), &[0, 3, 1, 2]);
        assert_eq!(e.prefix(), &[0, 3, 1, 2, 0, 3, 0, 3]);
        assert_eq!(e.period(), &[1, 2, 0, 3]);
    }

    #[test]
    fn unit_grain_maps_are_indicator_streams() {
        let (o, e) = oe_maps(&selector(&[], &[1]), Variant::ParetoAnonymity).unwrap();
        assert_eq!(o.period(), &[1, 0]);
        assert_eq!(e.period(), &[0, 1]);
        assert_eq!(o.prefix(), &[] as &[u64]);
    }

    #[test]
    fn regions_partition_every_coordinate() {
        for sel in [
            selector(&[], &[1]),
            selector(&[], &[0, 1]),
            selector(&[0, 0, 1], &[0, 1, 1]),
            selector(&[1, 0, 0, 0, 1], &[1, 1, 0]),
        ] {
            for &paired in &[true, false] {
                let dec = decompose(&sel, paired).unwrap();
                for n in 0..1000 {
                    let initial = n < dec.initial_end();
                    let even = dec.even_part.contains(n);
                    let odd = dec.odd_part.contains(n);
                    let hits = initial as u32 + even as u32 + odd as u32;
                    assert_eq!(hits, 1, "coordinate {n} hit {hits} regions");
                    let expect = match dec.region(n) {
                        Region::Initial => (true, false, false),
                        Region::Block(k) if k % 2 == 0 => (false, true, false),
                        Region::Block(_) => (false, false, true),
                    };
                    assert_eq!((initial, even, odd), expect, "at {n}");
                }
            }
        }
    }

    #[test]
    fn degenerate_selectors_are_rejected() {
        let wide = EventuallyPeriodicSeq::new(Alphabet::Bounded(4), vec![], vec![2]).unwrap();
        assert!(matches!(
            decompose(&wide, true),
            Err(SwrError::NotBinary)
        ));
        let dying = selector(&[1, 1], &[0]);
        assert!(matches!(
            decompose(&dying, true),
            Err(SwrError::FinitelyManyOnes)
        ));
    }
}
