//! Zero-density perturbation sets: finitely many points plus geometric tails.
//!
//! A [`SparseSet`] denotes a union of explicit points and tails
//! `{c * r^(s + d*t) : t in N}` with `c >= 1`, `r >= 2`, `d >= 1`. Exponents
//! are kept symbolic, so tails whose elements outgrow `u64` still count as
//! infinite. Membership, enumeration below a horizon, finiteness and emptiness
//! are exact; the one caveat is that sporadic coincidences between
//! multiplicatively independent tails are only tracked while they fit in u64,
//! which never affects a u64-level query. Oversized intermediate results are
//! reported as [`SparseError::CapExceeded`].

use num::{BigUint, One, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

/// Upper bound on points + tails a single set may hold.
const CAP: usize = 1 << 16;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum SparseError {
    #[error("sparse set exceeded {CAP} components")]
    CapExceeded,
}

/// `{base * ratio^(start + step*t) : t in N}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct GeomTail {
    pub base: u64,
    pub ratio: u64,
    pub start: u64,
    pub step: u64,
}

impl GeomTail {
    fn element(&self, t: u64) -> BigUint {
        BigUint::from(self.base) * BigUint::from(self.ratio).pow((self.start + self.step * t) as u32)
    }

    /// Exponent of `v` in this tail, if `v = base * ratio^e` with `e` in the
    /// exponent progression.
    fn exponent_of(&self, v: u64) -> Option<u64> {
        if v == 0 || v % self.base != 0 {
            return None;
        }
        let mut q = v / self.base;
        let mut e = 0u64;
        while q > 1 {
            if q % self.ratio != 0 {
                return None;
            }
            q /= self.ratio;
            e += 1;
        }
        (e >= self.start && (e - self.start) % self.step == 0).then_some(e)
    }

    fn contains(&self, v: u64) -> bool {
        self.exponent_of(v).is_some()
    }

    /// Elements `<= n`, in increasing order.
    fn elements_upto(&self, n: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut t = 0u64;
        loop {
            let v = self.element(t);
            if v > BigUint::from(n) {
                break;
            }
            out.push(u64::try_from(&v).expect("bounded by n"));
            t += 1;
        }
        out
    }

    /// Keep every `stride_t`-th exponent starting from parameter `first_t`.
    fn reindex(&self, first_t: u64, stride_t: u64) -> GeomTail {
        GeomTail {
            base: self.base,
            ratio: self.ratio,
            start: self.start + self.step * first_t,
            step: self.step * stride_t,
        }
    }
}

/// Finite union of points and geometric tails.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SparseSet {
    pub points: BTreeSet<u64>,
    pub tails: Vec<GeomTail>,
}

impl SparseSet {
    pub fn empty() -> Self {
        SparseSet::default()
    }

    pub fn from_points<I: IntoIterator<Item = u64>>(pts: I) -> Self {
        SparseSet {
            points: pts.into_iter().collect(),
            tails: Vec::new(),
        }
    }

    /// Geometric set `{c * r^k}` with degenerate cases folded into points.
    pub fn geometric(base: u64, ratio: u64) -> Self {
        match (base, ratio) {
            (0, _) => SparseSet::from_points([0]),
            (c, 0) => SparseSet::from_points([c, 0]),
            (c, 1) => SparseSet::from_points([c]),
            (base, ratio) => SparseSet {
                points: BTreeSet::new(),
                tails: vec![GeomTail {
                    base,
                    ratio,
                    start: 0,
                    step: 1,
                }],
            },
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.tails.is_empty()
    }

    /// Tails denote infinite sets, so finiteness is syntactic.
    pub fn is_finite(&self) -> bool {
        self.tails.is_empty()
    }

    pub fn contains(&self, v: u64) -> bool {
        self.points.contains(&v) || self.tails.iter().any(|t| t.contains(v))
    }

    /// All elements `<= n`, deduplicated and sorted.
    pub fn elements_upto(&self, n: u64) -> BTreeSet<u64> {
        let mut out: BTreeSet<u64> = self.points.range(..=n).copied().collect();
        for t in &self.tails {
            out.extend(t.elements_upto(n));
        }
        out
    }

    pub fn count_upto(&self, n: u64) -> u64 {
        self.elements_upto(n).len() as u64
    }

    fn checked(self) -> Result<Self, SparseError> {
        if self.points.len() + self.tails.len() > CAP {
            Err(SparseError::CapExceeded)
        } else {
            Ok(self)
        }
    }

    fn push_tail(&mut self, t: GeomTail) {
        if !self.tails.contains(&t) {
            self.tails.push(t);
        }
    }

    pub fn union(&self, other: &SparseSet) -> Result<SparseSet, SparseError> {
        let mut out = self.clone();
        out.points.extend(other.points.iter().copied());
        for t in &other.tails {
            out.push_tail(*t);
        }
        out.checked()
    }

    pub fn intersect(&self, other: &SparseSet) -> Result<SparseSet, SparseError> {
        let mut out = SparseSet::empty();
        for &p in &self.points {
            if other.contains(p) {
                out.points.insert(p);
            }
        }
        for &p in &other.points {
            if self.contains(p) {
                out.points.insert(p);
            }
        }
        for a in &self.tails {
            for b in &other.tails {
                let hit = tail_intersect(a, b);
                out.points.extend(hit.points);
                for t in hit.tails {
                    out.push_tail(t);
                }
            }
        }
        out.checked()
    }

    pub fn minus(&self, other: &SparseSet) -> Result<SparseSet, SparseError> {
        let mut out = SparseSet {
            points: self
                .points
                .iter()
                .copied()
                .filter(|&p| !other.contains(p))
                .collect(),
            tails: Vec::new(),
        };
        for tail in &self.tails {
            // Exponents of `tail` killed by `other`: finitely many singles
            // (point hits, sporadic coincidences) plus whole exponent
            // progressions (systematic coincidences).
            let mut dead_singles: BTreeSet<u64> = BTreeSet::new();
            let mut dead_progs: Vec<(u64, u64)> = Vec::new();
            for &p in &other.points {
                if let Some(e) = tail.exponent_of(p) {
                    dead_singles.insert(e);
                }
            }
            for b in &other.tails {
                let hit = tail_intersect(tail, b);
                for p in hit.points {
                    if let Some(e) = tail.exponent_of(p) {
                        dead_singles.insert(e);
                    }
                }
                for t in hit.tails {
                    // Reindexings of `tail`, so directly exponent progressions.
                    debug_assert_eq!((t.base, t.ratio), (tail.base, tail.ratio));
                    dead_progs.push((t.start, t.step));
                }
            }
            let kept = survivors(tail, &dead_singles, &dead_progs)?;
            out.points.extend(kept.points);
            for t in kept.tails {
                out.push_tail(t);
            }
        }
        out.checked()
    }
}

/// Remove the listed exponents and exponent progressions from a tail.
fn survivors(
    tail: &GeomTail,
    dead_singles: &BTreeSet<u64>,
    dead_progs: &[(u64, u64)],
) -> Result<SparseSet, SparseError> {
    if dead_singles.is_empty() && dead_progs.is_empty() {
        return Ok(SparseSet {
            points: BTreeSet::new(),
            tails: vec![*tail],
        });
    }
    // Work in the tail's own parameter t, where exponent = start + step*t.
    let to_t = |e: u64| -> Option<u64> {
        (e >= tail.start && (e - tail.start) % tail.step == 0).then(|| (e - tail.start) / tail.step)
    };
    let dead_t: BTreeSet<u64> = dead_singles.iter().filter_map(|&e| to_t(e)).collect();
    let mut progs_t: Vec<(u64, u64)> = Vec::new();
    for &(s, d) in dead_progs {
        // Strides of systematic coincidences are multiples of the tail's step.
        debug_assert_eq!(d % tail.step, 0);
        if let Some(t0) = to_t(s) {
            progs_t.push((t0, (d / tail.step).max(1)));
        }
    }
    // Split t-space by the lcm of the dead strides, past the largest single.
    let mut modulus = 1u64;
    for &(_, d) in &progs_t {
        modulus = num::integer::lcm(modulus, d);
        if modulus > 4096 {
            return Err(SparseError::CapExceeded);
        }
    }
    let horizon = dead_t
        .iter()
        .max()
        .copied()
        .unwrap_or(0)
        .max(progs_t.iter().map(|&(s, _)| s).max().unwrap_or(0))
        + 1;
    let killed = |t: u64| -> bool {
        dead_t.contains(&t) || progs_t.iter().any(|&(s, d)| t >= s && (t - s) % d == 0)
    };
    let mut out = SparseSet::empty();
    for t in 0..horizon {
        if !killed(t) {
            match u64::try_from(&tail.element(t)) {
                Ok(v) => {
                    out.points.insert(v);
                }
                // A surviving single element beyond u64 has no exact home.
                Err(_) => return Err(SparseError::CapExceeded),
            }
        }
    }
    for residue in 0..modulus {
        let t0 = horizon + ((residue + modulus - horizon % modulus) % modulus);
        if !killed(t0) {
            out.tails.push(tail.reindex(t0, modulus));
        }
    }
    out.checked()
}

/// Intersection of two tails. Resulting tails are reindexings of `a`.
fn tail_intersect(a: &GeomTail, b: &GeomTail) -> SparseSet {
    if a == b {
        return SparseSet {
            points: BTreeSet::new(),
            tails: vec![*a],
        };
    }
    if a.ratio == b.ratio {
        // c1*r^p = c2*r^q forces a fixed exponent offset between p and q,
        // and requires the larger base to be the smaller times a power of r.
        let (lo, hi) = if a.base <= b.base { (a, b) } else { (b, a) };
        if hi.base % lo.base != 0 {
            return SparseSet::empty();
        }
        let mut q = hi.base / lo.base;
        let mut off = 0u64;
        while q > 1 {
            if q % lo.ratio != 0 {
                return SparseSet::empty();
            }
            q /= lo.ratio;
            off += 1;
        }
        return if a.base <= b.base {
            meet_families(a, b, off, 1, 0, 1)
        } else {
            meet_families(a, b, 0, 1, off, 1)
        };
    }
    if let Some((x, y)) = dependence(a.ratio, b.ratio) {
        // All solutions of c1*r1^p = c2*r2^q translate by (x, y), so a
        // minimal one has p < x or q < y.
        let mut minimal: Option<(u64, u64)> = None;
        for p in 0..x {
            if let Some(q) = match_power(a.base, a.ratio, p, b.base, b.ratio) {
                minimal = Some((p, q));
                break;
            }
        }
        if minimal.is_none() {
            for q in 0..y {
                if let Some(p) = match_power(b.base, b.ratio, q, a.base, a.ratio) {
                    minimal = Some((p, q));
                    break;
                }
            }
        }
        match minimal {
            Some((p0, q0)) => meet_families(a, b, p0, x, q0, y),
            None => SparseSet::empty(),
        }
    } else {
        // Independent ratios meet only sporadically, and any common element
        // fitting in u64 appears by the time powers of `a` leave u64 range.
        // Larger coincidences are invisible to u64 queries and not tracked.
        let mut out = SparseSet::empty();
        for p in 0.. {
            let v = BigUint::from(a.base) * BigUint::from(a.ratio).pow(p as u32);
            let Ok(small) = u64::try_from(&v) else { break };
            if let Some(q) = exact_log(&v, b.base, b.ratio) {
                if in_prog(p, a.start, a.step) && in_prog(q, b.start, b.step) {
                    out.points.insert(small);
                }
            }
        }
        out
    }
}

fn in_prog(e: u64, start: u64, step: u64) -> bool {
    e >= start && (e - start) % step == 0
}

/// Common values of `a` and `b` along the solution family
/// `(p, q) = (p0 + dp*t, q0 + dq*t)`, filtered through both exponent
/// progressions; emitted as reindexings of `a`.
fn meet_families(a: &GeomTail, b: &GeomTail, p0: u64, dp: u64, q0: u64, dq: u64) -> SparseSet {
    let dp = dp.max(1);
    let dq = dq.max(1);
    // Validity of t is periodic with this modulus, beyond t_floor.
    let per_a = a.step / num::integer::gcd(dp, a.step);
    let per_b = b.step / num::integer::gcd(dq, b.step);
    let modulus = num::integer::lcm(per_a, per_b).max(1);
    let t_floor = {
        let ta = a.start.saturating_sub(p0).div_ceil(dp);
        let tb = b.start.saturating_sub(q0).div_ceil(dq);
        ta.max(tb)
    };
    let mut out = SparseSet::empty();
    for r in 0..modulus {
        let t = t_floor + r;
        let (p, q) = (p0 + dp * t, q0 + dq * t);
        if in_prog(p, a.start, a.step) && in_prog(q, b.start, b.step) {
            out.tails.push(GeomTail {
                base: a.base,
                ratio: a.ratio,
                start: p,
                step: dp * modulus,
            });
        }
    }
    out
}

/// Does `target_base * target_ratio^q == base * ratio^p` for some `q`?
fn match_power(base: u64, ratio: u64, p: u64, target_base: u64, target_ratio: u64) -> Option<u64> {
    let v = BigUint::from(base) * BigUint::from(ratio).pow(p as u32);
    exact_log(&v, target_base, target_ratio)
}

/// `q` with `v == base * ratio^q`, if any.
fn exact_log(v: &BigUint, base: u64, ratio: u64) -> Option<u64> {
    let base = BigUint::from(base);
    if v < &base || !(v % &base).is_zero() {
        return None;
    }
    let mut q = v / &base;
    let ratio = BigUint::from(ratio);
    let mut e = 0u64;
    while q > BigUint::one() {
        if !(&q % &ratio).is_zero() {
            return None;
        }
        q /= &ratio;
        e += 1;
    }
    Some(e)
}

/// Minimal `(x, y)` with `r1^x == r2^y`, if the ratios are multiplicatively
/// dependent. Both ratios fit in u64, so a dependence has `x <= 63`.
fn dependence(r1: u64, r2: u64) -> Option<(u64, u64)> {
    for x in 1..=63u64 {
        let mut q = BigUint::from(r1).pow(x as u32);
        let rb = BigUint::from(r2);
        let mut y = 0u64;
        while q > BigUint::one() && (&q % &rb).is_zero() {
            q /= &rb;
            y += 1;
        }
        if q.is_one() {
            return Some((x, y));
        }
    }
    None
}
