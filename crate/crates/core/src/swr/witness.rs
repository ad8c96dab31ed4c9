//! Splitting a cylinder across the even-top class.
//!
//! Fill the free coordinates of a silver condition with ones, decompose the
//! resulting selector, and drop a few free ones to build a companion
//! selector whose canonical maps relate to the originals by checkable
//! derivations.  Whichever way the ambient relation ranks the two maps of
//! the base, chaining the assumed ranking with the two derivations pins the
//! companion to the opposite side of the even-top class.
//!
//! Dropping a one whose enumeration index is `l >= 1` swaps the two maps
//! beyond the cut while leaving them alone below it, so the mismatch to
//! repair is confined to the blocks before the cut.  Dropping an adjacent
//! pair of ones flips a single block, a local mismatch one transfer (or one
//! dominance move) can absorb.  The mismatches oriented the wrong way for a
//! transfer are turned around by one finite rearrangement against spare
//! dropped pairs.

use std::fmt;

use super::decompose::{decompose, Decomposition};
use super::perm::FinitePermutation;
use super::steps::{
    check_derivation, rearranged, Derivation, DerivationStep, Relation, StepKind,
};
use super::{scale, SwrError, UtilityStream, Variant};
use crate::density::find_triples;
use crate::seqcore::{cylinder_member, Alphabet, Membership, PartialAssignment};
use crate::{q, Q};

/// How far the search for free runs of length three looks.
pub const TRIPLE_HORIZON: u64 = 1 << 16;

/// Assumed ranking of the base selector's even-favoring map against its
/// odd-favoring one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseAssumption {
    /// Even-favoring map strictly on top: the base is in the even-top class.
    EvenOnTop,
    /// Odd-favoring map strictly on top.
    OddOnTop,
    /// The two maps are equivalent.
    Tied,
}

impl fmt::Display for CaseAssumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CaseAssumption::EvenOnTop => "even-on-top",
            CaseAssumption::OddOnTop => "odd-on-top",
            CaseAssumption::Tied => "tied",
        };
        write!(f, "{name}")
    }
}

/// A base and companion in the same cylinder, split by the even-top class,
/// with the derivations certifying the split under the assumed case.
#[derive(Debug, Clone)]
pub struct WitnessBundle {
    pub variant: Variant,
    pub case: CaseAssumption,
    /// The condition's free coordinates filled with ones.
    pub base: UtilityStream,
    /// The base with the listed coordinates dropped to zero.
    pub companion: UtilityStream,
    /// Dropped one with the parity-selected enumeration index, if the case
    /// needed a tail swap.
    pub dropped_single: Option<u64>,
    /// Starts `m` of dropped adjacent pairs `{m, m+1}`.
    pub dropped_pairs: Vec<u64>,
    /// Rearrangement the derivations open with; identity when none is needed.
    pub permutation: FinitePermutation,
    pub derivations: [Derivation; 2],
    /// Class membership of the base under the assumed case.
    pub base_in_class: bool,
    /// Class membership of the companion forced by the derivations.
    pub companion_in_class: bool,
}

/// Build the companion and its certifying derivations for a silver binary
/// condition, under a density hypothesis strictly above `2/3` and an assumed
/// case of the ambient relation.
pub fn case_witness(
    f: &PartialAssignment,
    delta: Q,
    case: CaseAssumption,
    variant: Variant,
) -> Result<WitnessBundle, SwrError> {
    if delta <= q(2, 3) {
        return Err(SwrError::DeltaTooSmall(delta));
    }
    if f.alphabet() != Alphabet::Bounded(2) {
        return Err(SwrError::NotBinary);
    }
    if !f.is_silver() {
        return Err(SwrError::NotSilver);
    }
    let base = f.fill(1)?;
    let paired = variant.paired();
    let dec = decompose(&base, paired)?;
    let runs = disjoint_runs(&find_triples(f.free(), TRIPLE_HORIZON)?);
    let short = |needed: u64| SwrError::InsufficientTriples {
        needed,
        found: runs.len() as u64,
        horizon: TRIPLE_HORIZON,
    };
    let &h0 = runs.first().ok_or_else(|| short(1))?;

    let (companion, dropped_single, dropped_pairs, permutation) = match case {
        CaseAssumption::Tied => {
            let m = pair_start(&dec, h0, 1);
            let companion = base.with_overrides(&[(m, 0), (m + 1, 0)])?;
            (companion, None, vec![m], FinitePermutation::identity())
        }
        _ => {
            let i0 = index_at(&dec, h0);
            let l_parity = if case == CaseAssumption::EvenOnTop { 0 } else { 1 };
            // l = 0 would enlarge the initial segment instead of swapping
            // the tails, so the first enumeration index is never used.
            let l = (i0..=i0 + 2)
                .find(|i| i % 2 == l_parity && *i >= 1)
                .expect("three consecutive indices contain a usable one");
            let n_l = dec.boundary(l);
            let side = block_coords(&dec, l, l_parity);
            let grain = if paired { 2 } else { 1 };
            let fixups = side.len() as u64 / grain;
            let pair_count = fixups + 2;
            if (runs.len() as u64) < pair_count + 1 {
                return Err(short(pair_count + 1));
            }
            let pairs: Vec<u64> = runs[1..=pair_count as usize]
                .iter()
                .map(|&h| pair_start(&dec, h, 1 - l_parity))
                .collect();
            let mut drops = vec![(n_l, 0)];
            for &m in &pairs {
                drops.push((m, 0));
                drops.push((m + 1, 0));
            }
            let companion = base.with_overrides(&drops)?;
            let mut swaps = Vec::new();
            if paired {
                let evens = side.iter().copied().filter(|c| c % 2 == 0);
                let odds = side.iter().copied().filter(|c| c % 2 == 1);
                for ((u, v), &m) in evens.zip(odds).zip(&pairs) {
                    swaps.push((u, 2 * m));
                    swaps.push((v, 2 * m + 1));
                }
            } else {
                for (&u, &m) in side.iter().zip(&pairs) {
                    swaps.push((u, m));
                }
            }
            let perm = FinitePermutation::from_swaps(&swaps)?;
            (companion, Some(n_l), pairs, perm)
        }
    };

    let companion_dec = decompose(&companion, paired)?;
    let even_base = dec.favor_even_map();
    let odd_base = dec.favor_odd_map();
    let even_comp = companion_dec.favor_even_map();
    let odd_comp = companion_dec.favor_odd_map();
    let (first, second) = match case {
        CaseAssumption::EvenOnTop => (
            repair(&even_comp, &odd_base, &permutation, paired)?,
            repair(&even_base, &odd_comp, &permutation, paired)?,
        ),
        CaseAssumption::OddOnTop => (
            repair(&odd_comp, &even_base, &permutation, paired)?,
            repair(&odd_base, &even_comp, &permutation, paired)?,
        ),
        CaseAssumption::Tied => (
            repair(&even_base, &even_comp, &permutation, paired)?,
            repair(&odd_comp, &odd_base, &permutation, paired)?,
        ),
    };
    let derivations = [
        Derivation::new(first, Relation::StrictlyBelow),
        Derivation::new(second, Relation::StrictlyBelow),
    ];
    for (index, d) in derivations.iter().enumerate() {
        check_derivation(d).map_err(|source| SwrError::DerivationRejected { index, source })?;
    }

    let cyl = f.clone().cylinder();
    let depth = base.decision_window(&companion);
    for member in [&base, &companion] {
        if let Membership::DisagreesAt(n) = cylinder_member(member, &cyl, depth)? {
            return Err(SwrError::OutsideCylinder(n));
        }
    }

    Ok(WitnessBundle {
        variant,
        case,
        base,
        companion,
        dropped_single,
        dropped_pairs,
        permutation,
        derivations,
        base_in_class: case == CaseAssumption::EvenOnTop,
        companion_in_class: case != CaseAssumption::EvenOnTop,
    })
}

/// Greedy thinning of ascending run starts to pairwise disjoint ones.
fn disjoint_runs(starts: &[u64]) -> Vec<u64> {
    let mut out = Vec::new();
    let mut next_allowed = 0;
    for &h in starts {
        if h >= next_allowed {
            out.push(h);
            next_allowed = h + 3;
        }
    }
    out
}

fn index_at(dec: &Decomposition, h: u64) -> u64 {
    dec.index_of(h).expect("run start is a one of the filled stream")
}

/// First coordinate of the adjacent pair inside the run at `h` whose
/// enumeration index has the wanted parity.
fn pair_start(dec: &Decomposition, h: u64, parity: u64) -> u64 {
    if index_at(dec, h) % 2 == parity {
        h
    } else {
        h + 1
    }
}

/// All utility coordinates of the blocks below `l` with index of the given
/// parity.
fn block_coords(dec: &Decomposition, l: u64, parity: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for k in (parity..l).step_by(2) {
        let (lo, hi) = dec.block(k);
        out.extend(lo..hi);
    }
    out
}

/// Steps carrying `source` to `target`: an opening rearrangement when `perm`
/// moves anything, then one transfer per raised/lowered pair of residual
/// mismatches, or a single dominance move when the scale is binary.
fn repair(
    source: &UtilityStream,
    target: &UtilityStream,
    perm: &FinitePermutation,
    paired: bool,
) -> Result<Vec<DerivationStep>, SwrError> {
    let mut steps = Vec::new();
    let mut current = source.clone();
    if !perm.is_identity() {
        let turned = rearranged(&current, perm);
        steps.push(DerivationStep {
            kind: StepKind::Anonymity(perm.clone()),
            source: current,
            target: turned.clone(),
            relation: Relation::Equivalent,
        });
        current = turned;
    }
    let mut raises = Vec::new();
    let mut lowers = Vec::new();
    for n in 0..current.decision_window(target) {
        let have = current.eval(n);
        let want = target.eval(n);
        if have == want {
            continue;
        }
        match (paired, have, want) {
            (true, scale::A, scale::B) => raises.push(n),
            (true, scale::D, scale::C) => lowers.push(n),
            (false, 0, 1) => raises.push(n),
            _ => return Err(SwrError::UnrepairableGap { coordinate: n }),
        }
    }
    if !paired {
        if !raises.is_empty() {
            steps.push(DerivationStep {
                kind: StepKind::Dominance,
                source: current,
                target: target.clone(),
                relation: Relation::StrictlyBelow,
            });
        }
        return Ok(steps);
    }
    if raises.len() != lowers.len() {
        let unmatched = if raises.len() > lowers.len() {
            raises[lowers.len()]
        } else {
            lowers[raises.len()]
        };
        return Err(SwrError::UnrepairableGap { coordinate: unmatched });
    }
    let total = raises.len();
    for (k, (&i, &j)) in raises.iter().zip(&lowers).enumerate() {
        let next = if k + 1 == total {
            target.clone()
        } else {
            current.with_overrides(&[(i, scale::B), (j, scale::C)])?
        };
        steps.push(DerivationStep {
            kind: StepKind::Equity { i, j },
            source: current,
            target: next.clone(),
            relation: Relation::StrictlyBelow,
        });
        current = next;
    }
    Ok(steps)
}
