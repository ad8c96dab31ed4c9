//! Exact normal form for coalition descriptors.
//!
//! Every descriptor normalizes to `(E \ M) + P`: an eventually periodic
//! backbone `E` given by a binary word, minus a sparse carve-out `M` inside
//! the backbone, plus a sparse graft `P` outside it. The class is closed under
//! complement, union and intersection, which makes membership, counting,
//! finiteness, cofiniteness, exact density and equivalence all decidable.

use super::sparse::{GeomTail, SparseError, SparseSet};
use crate::seqcore::stream::{EventuallyPeriodicSeq, Alphabet};
use crate::Q;
use num::BigUint;
use std::collections::BTreeSet;
use thiserror::Error;

/// Bound on the combined period length when aligning two backbones.
const PERIOD_CAP: u64 = 1 << 20;
/// Bound on emitted components when a tail is filtered through a word.
const TAIL_SPLIT_CAP: usize = 4096;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum NormalizeError {
    #[error("arithmetic progression needs a nonzero step")]
    ZeroStep,
    #[error("periodic pattern needs a nonempty period")]
    EmptyPeriod,
    #[error("periodic pattern symbol {0} is not a bit")]
    NonBinarySymbol(u64),
    #[error("combined period {0} exceeds {PERIOD_CAP}")]
    PeriodCap(u64),
    #[error(transparent)]
    Sparse(#[from] SparseError),
    #[error("tail split into more than {TAIL_SPLIT_CAP} components")]
    TailSplitCap,
}

/// `(E \ M) + P` with the invariants `M` inside the ones of `E` and `P`
/// disjoint from them.
#[derive(Debug, Clone)]
pub struct NormalForm {
    word: EventuallyPeriodicSeq,
    minus: SparseSet,
    plus: SparseSet,
}

impl NormalForm {
    pub fn empty() -> Self {
        NormalForm {
            word: word_const(0),
            minus: SparseSet::empty(),
            plus: SparseSet::empty(),
        }
    }

    pub fn full() -> Self {
        NormalForm {
            word: word_const(1),
            minus: SparseSet::empty(),
            plus: SparseSet::empty(),
        }
    }

    pub fn finite<I: IntoIterator<Item = u64>>(points: I) -> Self {
        let pts: BTreeSet<u64> = points.into_iter().collect();
        let len = pts.last().map_or(0, |&m| m + 1);
        let prefix = (0..len).map(|k| u64::from(pts.contains(&k))).collect();
        NormalForm {
            word: EventuallyPeriodicSeq::new(Alphabet::Bounded(2), prefix, vec![0]).expect("bits"),
            minus: SparseSet::empty(),
            plus: SparseSet::empty(),
        }
    }

    pub fn arith(start: u64, step: u64) -> Result<Self, NormalizeError> {
        if step == 0 {
            return Err(NormalizeError::ZeroStep);
        }
        let mut period = vec![0; step as usize];
        period[0] = 1;
        let word = EventuallyPeriodicSeq::new(Alphabet::Bounded(2), vec![0; start as usize], period)
            .expect("bits");
        Ok(NormalForm {
            word,
            minus: SparseSet::empty(),
            plus: SparseSet::empty(),
        })
    }

    pub fn geometric(base: u64, ratio: u64) -> Self {
        NormalForm {
            word: word_const(0),
            minus: SparseSet::empty(),
            plus: SparseSet::geometric(base, ratio),
        }
    }

    pub fn periodic(prefix: &[u64], period: &[u64]) -> Result<Self, NormalizeError> {
        if period.is_empty() {
            return Err(NormalizeError::EmptyPeriod);
        }
        if let Some(&bad) = prefix.iter().chain(period).find(|&&s| s > 1) {
            return Err(NormalizeError::NonBinarySymbol(bad));
        }
        Ok(NormalForm {
            word: EventuallyPeriodicSeq::new(Alphabet::Bounded(2), prefix.to_vec(), period.to_vec())
                .expect("bits"),
            minus: SparseSet::empty(),
            plus: SparseSet::empty(),
        })
    }

    pub fn contains(&self, n: u64) -> bool {
        if self.plus.contains(n) {
            return true;
        }
        self.word.eval(n) == 1 && !self.minus.contains(n)
    }

    /// Number of members in the closed interval `[0, n]`.
    pub fn count_upto(&self, n: u64) -> u64 {
        word_ones_upto(&self.word, n) - self.minus.count_upto(n) + self.plus.count_upto(n)
    }

    pub fn complement(&self) -> NormalForm {
        // Complementing swaps the roles of the two sparse parts.
        NormalForm {
            word: word_not(&self.word),
            minus: self.plus.clone(),
            plus: self.minus.clone(),
        }
    }

    pub fn union(&self, other: &NormalForm) -> Result<NormalForm, NormalizeError> {
        let word = word_or(&self.word, &other.word)?;
        let plus = sparse_vs_word(&self.plus.union(&other.plus)?, &word, false)?;
        // A carved-out point survives only if the other side misses it too.
        let m1 = sparse_outside(&self.minus, other)?;
        let m2 = sparse_outside(&other.minus, self)?;
        Ok(NormalForm {
            word,
            minus: m1.union(&m2)?,
            plus,
        })
    }

    pub fn intersect(&self, other: &NormalForm) -> Result<NormalForm, NormalizeError> {
        Ok(self.complement().union(&other.complement())?.complement())
    }

    pub fn minus_set(&self, other: &NormalForm) -> Result<NormalForm, NormalizeError> {
        self.intersect(&other.complement())
    }

    pub fn is_empty(&self) -> bool {
        if !self.plus.is_empty() {
            return false;
        }
        // A periodic one recurs infinitely often; no sparse set covers that.
        if word_has_periodic_ones(&self.word) {
            return false;
        }
        word_finite_ones(&self.word).iter().all(|&k| self.minus.contains(k))
    }

    pub fn is_finite(&self) -> bool {
        !word_has_periodic_ones(&self.word) && self.plus.is_finite()
    }

    pub fn is_cofinite(&self) -> bool {
        self.complement().is_finite()
    }

    pub fn equivalent(&self, other: &NormalForm) -> Result<bool, NormalizeError> {
        Ok(self.minus_set(other)?.is_empty() && other.minus_set(self)?.is_empty())
    }

    /// Natural density, which every normal form possesses: the sparse parts
    /// contribute nothing in the limit.
    pub fn density(&self) -> Q {
        let period = self.word.period();
        let ones = period.iter().filter(|&&b| b == 1).count() as u64;
        Q::new(ones, period.len() as u64)
    }

    /// Bound on `|count[0,n] - density*(n+1)|`, valid for every `n`.
    pub fn count_slack(&self, n: u64) -> u64 {
        let structural = (self.word.prefix().len() + self.word.period().len()) as u64;
        structural + self.minus.count_upto(n) + self.plus.count_upto(n) + 1
    }

    /// The set as a plain characteristic word, when it is genuinely
    /// eventually periodic: both sparse parts finite, folded into the prefix.
    pub fn to_word(&self) -> Option<EventuallyPeriodicSeq> {
        if !self.minus.is_finite() || !self.plus.is_finite() {
            return None;
        }
        let hi = self
            .minus
            .points
            .iter()
            .chain(self.plus.points.iter())
            .max()
            .map_or(0, |&m| m + 1);
        let cut = (self.word.prefix().len() as u64).max(hi);
        let prefix = (0..cut).map(|k| u64::from(self.contains(k))).collect();
        let per = self.word.period().len() as u64;
        let period = (cut..cut + per).map(|k| self.word.eval(k)).collect();
        Some(
            EventuallyPeriodicSeq::new(Alphabet::Bounded(2), prefix, period)
                .expect("bits")
                .normalize(),
        )
    }
}

fn word_const(bit: u64) -> EventuallyPeriodicSeq {
    EventuallyPeriodicSeq::new(Alphabet::Bounded(2), Vec::new(), vec![bit]).expect("bit")
}

fn word_not(w: &EventuallyPeriodicSeq) -> EventuallyPeriodicSeq {
    let flip = |v: &[u64]| v.iter().map(|&b| 1 - b).collect::<Vec<_>>();
    EventuallyPeriodicSeq::new(Alphabet::Bounded(2), flip(w.prefix()), flip(w.period())).expect("bits")
}

fn word_or(a: &EventuallyPeriodicSeq, b: &EventuallyPeriodicSeq) -> Result<EventuallyPeriodicSeq, NormalizeError> {
    let pref = a.prefix().len().max(b.prefix().len()) as u64;
    let lcm = num::integer::lcm(a.period().len() as u64, b.period().len() as u64);
    if lcm > PERIOD_CAP {
        return Err(NormalizeError::PeriodCap(lcm));
    }
    let prefix = (0..pref).map(|k| a.eval(k) | b.eval(k)).collect();
    let period = (pref..pref + lcm).map(|k| a.eval(k) | b.eval(k)).collect();
    Ok(EventuallyPeriodicSeq::new(Alphabet::Bounded(2), prefix, period)
        .expect("bits")
        .normalize())
}

/// Ones of `w` in the closed interval `[0, n]`.
fn word_ones_upto(w: &EventuallyPeriodicSeq, n: u64) -> u64 {
    let total = n + 1;
    let plen = w.prefix().len() as u64;
    let head = w.prefix()[..total.min(plen) as usize]
        .iter()
        .filter(|&&b| b == 1)
        .count() as u64;
    if total <= plen {
        return head;
    }
    let span = total - plen;
    let per = w.period().len() as u64;
    let per_ones = w.period().iter().filter(|&&b| b == 1).count() as u64;
    let partial = w.period()[..(span % per) as usize]
        .iter()
        .filter(|&&b| b == 1)
        .count() as u64;
    head + (span / per) * per_ones + partial
}

fn word_has_periodic_ones(w: &EventuallyPeriodicSeq) -> bool {
    w.period().iter().any(|&b| b == 1)
}

/// Positions of ones when there are finitely many.
fn word_finite_ones(w: &EventuallyPeriodicSeq) -> Vec<u64> {
    debug_assert!(!word_has_periodic_ones(w));
    w.prefix()
        .iter()
        .enumerate()
        .filter(|(_, &b)| b == 1)
        .map(|(k, _)| k as u64)
        .collect()
}

/// Elements of `m` lying outside the set `(E \ M) + P` given by `nf`.
fn sparse_outside(m: &SparseSet, nf: &NormalForm) -> Result<SparseSet, NormalizeError> {
    let clear = m.minus(&nf.plus)?;
    let off_word = sparse_vs_word(&clear, &nf.word, false)?;
    let carved = clear.intersect(&nf.minus)?;
    Ok(off_word.union(&carved)?)
}

/// Restrict a sparse set to the ones of `word` (`keep = true`) or to its
/// zeros (`keep = false`).
fn sparse_vs_word(s: &SparseSet, word: &EventuallyPeriodicSeq, keep: bool) -> Result<SparseSet, NormalizeError> {
    let mut out = SparseSet {
        points: s
            .points
            .iter()
            .copied()
            .filter(|&p| (word.eval(p) == 1) == keep)
            .collect(),
        tails: Vec::new(),
    };
    for tail in &s.tails {
        let filtered = tail_vs_word(tail, word, keep)?;
        out.points.extend(filtered.points);
        for t in filtered.tails {
            if !out.tails.contains(&t) {
                out.tails.push(t);
            }
        }
        if out.tails.len() > TAIL_SPLIT_CAP {
            return Err(NormalizeError::TailSplitCap);
        }
    }
    Ok(out)
}

/// Filter one tail through a word. Elements inside the word's prefix are
/// classified directly; beyond it, the element's residue modulo the period
/// length evolves multiplicatively, so its orbit is preperiodic and each
/// accepted cycle slot becomes a reindexed tail.
fn tail_vs_word(tail: &GeomTail, word: &EventuallyPeriodicSeq, keep: bool) -> Result<SparseSet, NormalizeError> {
    let plen = word.prefix().len() as u64;
    let per = word.period().len() as u64;
    let mut out = SparseSet::empty();
    let accepted = |bit: u64| (bit == 1) == keep;
    // Inside the prefix: finitely many, strictly increasing.
    let mut t = 0u64;
    let big_plen = BigUint::from(plen);
    while tail_element(tail, t) < big_plen {
        let v = u64::try_from(&tail_element(tail, t)).expect("below prefix length");
        if accepted(word.eval(v)) {
            out.points.insert(v);
        }
        t += 1;
    }
    // Beyond: track v mod per. The step multiplier is fixed, so the orbit is
    // eventually periodic; find the cycle with a visited map.
    let step_mul = mod_pow(tail.ratio % per, tail.step, per);
    let mut residue =
        u64::try_from(&(tail_element(tail, t) % BigUint::from(per))).expect("residue fits");
    let mut seen: Vec<(u64, u64)> = Vec::new(); // (residue, t)
    let mut index: std::collections::HashMap<u64, usize> = std::collections::HashMap::new();
    let cycle_entry = loop {
        if let Some(&pos) = index.get(&residue) {
            break pos;
        }
        index.insert(residue, seen.len());
        seen.push((residue, t));
        residue = residue * step_mul % per;
        t += 1;
    };
    // Bit governing an element v >= plen with v mod per == r.
    let bit_at = |r: u64| word.period()[((r + per - plen % per) % per) as usize];
    for (pos, &(r, t_seen)) in seen.iter().enumerate() {
        if !accepted(bit_at(r)) {
            continue;
        }
        if pos < cycle_entry {
            // Preperiodic slot: a single element.
            match u64::try_from(&tail_element(tail, t_seen)) {
                Ok(v) => {
                    out.points.insert(v);
                }
                Err(_) => return Err(NormalizeError::Sparse(SparseError::CapExceeded)),
            }
        } else {
            let cycle_len = (seen.len() - cycle_entry) as u64;
            out.tails.push(GeomTail {
                base: tail.base,
                ratio: tail.ratio,
                start: tail.start + tail.step * t_seen,
                step: tail.step * cycle_len,
            });
        }
    }
    if out.tails.len() > TAIL_SPLIT_CAP {
        return Err(NormalizeError::TailSplitCap);
    }
    Ok(out)
}

fn tail_element(tail: &GeomTail, t: u64) -> BigUint {
    BigUint::from(tail.base) * BigUint::from(tail.ratio).pow((tail.start + tail.step * t) as u32)
}

fn mod_pow(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc
}
