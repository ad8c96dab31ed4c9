//! Voting rules with finite support, and exact tests for when a coalition of
//! coordinates has no say in the outcome.
//!
//! A [`ChoiceFunction`] reads finitely many coordinates of a stream and emits
//! a value below its alphabet size.  [`is_irrelevant`] decides, by exhausting
//! the finitely many completions that matter, whether the function is constant
//! on a cylinder; [`is_anti_democratic`] searches named coalition families for
//! a large coalition that is frozen out this way.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::seqcore::{
    Alphabet, AssignmentError, CoalitionDescriptor, Cylinder, EventuallyPeriodicSeq,
    NormalizeError, PartialAssignment,
};
use crate::Q;

/// Ceiling on brute-force evaluations per decision; 2^20 keeps the worst case
/// around a million rule applications.
pub const DEFAULT_EVAL_CAP: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum CoalitionError {
    #[error("alphabet size {0} is too small for a choice function")]
    AlphabetTooSmall(u64),
    #[error("dictator coordinate {0} is outside the support")]
    DictatorOutsideSupport(u64),
    #[error("parity rules need a two-letter alphabet, got {0}")]
    ParityNeedsBinary(u64),
    #[error("value {value} is not below the alphabet size {k}")]
    ValueOutOfAlphabet { value: u64, k: u64 },
    #[error("truth table needs {expected} entries, got {got}")]
    TableSizeMismatch { expected: u128, got: usize },
    #[error("the assignment's free coordinates do not form the given coalition")]
    FreeMismatch,
    #[error("function, assignment, and open set must share one alphabet")]
    AlphabetMismatch,
    #[error("{required} completions exceed the brute-force cap of {cap}")]
    CapExceeded { required: u128, cap: u64 },
    #[error("no point of the cylinder lies in the open set")]
    Vacuous,
    #[error("open-set piece pins coordinate {coordinate} at or beyond depth {depth}")]
    DepthTooShallow { coordinate: u64, depth: u64 },
    #[error("open-set piece pins infinitely many coordinates")]
    PieceNotClopen,
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
}

/// How a [`ChoiceFunction`] turns the values on its support into an outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChoiceRule {
    /// Copies one supported coordinate.
    Dictator { coordinate: u64 },
    /// Sum modulo 2 over the support; binary alphabets only.
    Parity,
    /// The most frequent value on the support, or `tie` when no value is
    /// strictly most frequent.
    Majority { tie: u64 },
    /// Explicit outcome per assignment to the support.  The entry index reads
    /// the supported coordinates in increasing order as base-k digits, most
    /// significant first, so entry order is lexicographic in the assignment.
    Table { entries: Vec<u64> },
    Constant { value: u64 },
}

/// A rule over alphabet `{0, .., k-1}` whose outcome depends only on the
/// values at an explicit finite support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceFunction {
    k: u64,
    support: Vec<u64>,
    rule: ChoiceRule,
}

impl ChoiceFunction {
    fn build<I: IntoIterator<Item = u64>>(
        k: u64,
        support: I,
        rule: ChoiceRule,
    ) -> Result<Self, CoalitionError> {
        if k < 2 {
            return Err(CoalitionError::AlphabetTooSmall(k));
        }
        let set: BTreeSet<u64> = support.into_iter().collect();
        Ok(ChoiceFunction {
            k,
            support: set.into_iter().collect(),
            rule,
        })
    }

    pub fn dictator<I: IntoIterator<Item = u64>>(
        k: u64,
        support: I,
        coordinate: u64,
    ) -> Result<Self, CoalitionError> {
        let f = Self::build(k, support, ChoiceRule::Dictator { coordinate })?;
        if !f.support.contains(&coordinate) {
            return Err(CoalitionError::DictatorOutsideSupport(coordinate));
        }
        Ok(f)
    }

    pub fn parity<I: IntoIterator<Item = u64>>(support: I) -> Self {
        Self::build(2, support, ChoiceRule::Parity).expect("binary alphabet is large enough")
    }

    pub fn majority<I: IntoIterator<Item = u64>>(
        k: u64,
        support: I,
        tie: u64,
    ) -> Result<Self, CoalitionError> {
        if tie >= k {
            return Err(CoalitionError::ValueOutOfAlphabet { value: tie, k });
        }
        Self::build(k, support, ChoiceRule::Majority { tie })
    }

    pub fn table<I: IntoIterator<Item = u64>>(
        k: u64,
        support: I,
        entries: Vec<u64>,
    ) -> Result<Self, CoalitionError> {
        let f = Self::build(k, support, ChoiceRule::Constant { value: 0 })?;
        let expected = (k as u128)
            .checked_pow(f.support.len() as u32)
            .unwrap_or(u128::MAX);
        if expected != entries.len() as u128 {
            return Err(CoalitionError::TableSizeMismatch {
                expected,
                got: entries.len(),
            });
        }
        if let Some(&value) = entries.iter().find(|&&v| v >= k) {
            return Err(CoalitionError::ValueOutOfAlphabet { value, k });
        }
        Ok(ChoiceFunction {
            rule: ChoiceRule::Table { entries },
            ..f
        })
    }

    /// Ignores everyone; the support is empty.
    pub fn constant(k: u64, value: u64) -> Result<Self, CoalitionError> {
        if value >= k {
            return Err(CoalitionError::ValueOutOfAlphabet { value, k });
        }
        Self::build(k, [], ChoiceRule::Constant { value })
    }

    pub fn alphabet_size(&self) -> u64 {
        self.k
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::Bounded(self.k)
    }

    /// Supported coordinates in increasing order.
    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn rule(&self) -> &ChoiceRule {
        &self.rule
    }

    /// Outcome on a full stream.  Panics if `x` ranges over a different
    /// alphabet.
    pub fn eval(&self, x: &EventuallyPeriodicSeq) -> u64 {
        assert!(
            x.alphabet() == self.alphabet(),
            "choice function and stream use different alphabets"
        );
        self.eval_at(|s| x.eval(s))
    }

    // Outcome from the supported values alone; `at` is consulted only on the
    // support and must return values below k.
    fn eval_at(&self, mut at: impl FnMut(u64) -> u64) -> u64 {
        match &self.rule {
            ChoiceRule::Dictator { coordinate } => at(*coordinate),
            ChoiceRule::Parity => self.support.iter().map(|&s| at(s)).sum::<u64>() % 2,
            ChoiceRule::Majority { tie } => {
                let mut counts = vec![0u64; self.k as usize];
                for &s in &self.support {
                    counts[at(s) as usize] += 1;
                }
                let mut best = 0u64;
                let mut best_count = 0u64;
                let mut contested = false;
                for (v, &c) in counts.iter().enumerate() {
                    if c > best_count {
                        best = v as u64;
                        best_count = c;
                        contested = false;
                    } else if c == best_count && c > 0 {
                        contested = true;
                    }
                }
                if best_count == 0 || contested {
                    *tie
                } else {
                    best
                }
            }
            ChoiceRule::Table { entries } => {
                let mut idx = 0usize;
                for &s in &self.support {
                    idx = idx * self.k as usize + at(s) as usize;
                }
                entries[idx]
            }
            ChoiceRule::Constant { value } => *value,
        }
    }
}

/// Verdict on whether a coalition can still move the outcome inside a
/// cylinder.
#[derive(Debug, Clone)]
pub enum Irrelevance {
    /// The function is constant on the cylinder.
    Irrelevant { value: u64 },
    /// Two members of the cylinder with different outcomes; they differ only
    /// on coalition coordinates.
    Relevant {
        witnesses: (EventuallyPeriodicSeq, EventuallyPeriodicSeq),
    },
}

// Base-k digits of c, most significant first, one per slot.
fn decode(k: u64, len: usize, mut c: u128) -> Vec<u64> {
    let mut out = vec![0u64; len];
    for slot in out.iter_mut().rev() {
        *slot = (c % k as u128) as u64;
        c /= k as u128;
    }
    out
}

fn materialize(
    assignment: &PartialAssignment,
    extra: &[(u64, u64)],
) -> EventuallyPeriodicSeq {
    let mut overrides: Vec<(u64, u64)> = assignment
        .explicit()
        .iter()
        .map(|(&n, &v)| (n, v))
        .collect();
    overrides.extend_from_slice(extra);
    assignment
        .tail_rule()
        .with_overrides(&overrides)
        .expect("override values were drawn from the same alphabet")
}

/// Decides whether the outcome is already settled once everything outside
/// `coalition` is pinned by `assignment`.
///
/// The assignment's free coordinates must form exactly the coalition.  Only
/// the supported coalition coordinates can move the outcome, so the decision
/// exhausts those completions in lexicographic order; the relevant verdict
/// reports the least completion pair with differing outcomes.
pub fn is_irrelevant(
    choice: &ChoiceFunction,
    coalition: &CoalitionDescriptor,
    assignment: &PartialAssignment,
) -> Result<Irrelevance, CoalitionError> {
    is_irrelevant_capped(choice, coalition, assignment, DEFAULT_EVAL_CAP)
}

pub fn is_irrelevant_capped(
    choice: &ChoiceFunction,
    coalition: &CoalitionDescriptor,
    assignment: &PartialAssignment,
    cap: u64,
) -> Result<Irrelevance, CoalitionError> {
    if assignment.alphabet() != choice.alphabet() {
        return Err(CoalitionError::AlphabetMismatch);
    }
    if !assignment.free().equivalent(coalition)? {
        return Err(CoalitionError::FreeMismatch);
    }
    let free_s: Vec<u64> = choice
        .support
        .iter()
        .copied()
        .filter(|&s| coalition.contains(s))
        .collect();
    let total = (choice.k as u128)
        .checked_pow(free_s.len() as u32)
        .unwrap_or(u128::MAX);
    if total > cap as u128 {
        return Err(CoalitionError::CapExceeded {
            required: total,
            cap,
        });
    }
    let value_of = |digits: &[u64]| {
        choice.eval_at(|s| match free_s.iter().position(|&t| t == s) {
            Some(i) => digits[i],
            None => assignment
                .value_at(s)
                .expect("coordinates outside the coalition are pinned"),
        })
    };
    let base = decode(choice.k, free_s.len(), 0);
    let settled = value_of(&base);
    for c in 1..total {
        let digits = decode(choice.k, free_s.len(), c);
        if value_of(&digits) != settled {
            let pin = |d: &[u64]| {
                let extra: Vec<(u64, u64)> =
                    free_s.iter().copied().zip(d.iter().copied()).collect();
                materialize(assignment, &extra)
            };
            return Ok(Irrelevance::Relevant {
                witnesses: (pin(&base), pin(&digits)),
            });
        }
    }
    Ok(Irrelevance::Irrelevant { value: settled })
}

/// Named families of coalitions that anti-democracy searches range over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoalitionFamily {
    /// All infinite coalitions.
    Infinite,
    /// Coalitions whose density is at least the threshold.
    DenseAtLeast(Q),
    /// Coalitions missing at most one coordinate.
    CoSingleton,
    /// Coalitions missing only finitely many coordinates.
    Cofinite,
}

impl CoalitionFamily {
    pub fn admits(&self, coalition: &CoalitionDescriptor) -> Result<bool, NormalizeError> {
        match self {
            CoalitionFamily::Infinite => Ok(!coalition.is_finite()?),
            CoalitionFamily::DenseAtLeast(delta) => Ok(coalition.exact_density()? >= *delta),
            CoalitionFamily::CoSingleton => {
                let missing = finite_elements(&coalition.clone().complement())?;
                Ok(matches!(missing, Some(ref m) if m.len() <= 1))
            }
            CoalitionFamily::Cofinite => coalition.is_cofinite(),
        }
    }
}

/// The elements of a finite coalition, or None when it is infinite.
pub fn finite_elements(
    coalition: &CoalitionDescriptor,
) -> Result<Option<Vec<u64>>, NormalizeError> {
    let nf = coalition.normal_form()?;
    if !nf.is_finite() {
        return Ok(None);
    }
    let word = nf.to_word().expect("finite sets have no geometric part");
    Ok(Some(
        word.prefix()
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v == 1)
            .map(|(n, _)| n as u64)
            .collect(),
    ))
}

/// Outcome of an anti-democracy search.
#[derive(Debug, Clone)]
pub enum AntiDemocracy {
    /// A coalition from the family, together with an assignment of everyone
    /// outside it that freezes the outcome.
    Yes {
        coalition: CoalitionDescriptor,
        assignment: PartialAssignment,
    },
    /// Nothing in the searched candidates worked; says nothing about
    /// coalitions outside the search space.
    NoWithinSearchSpace,
}

fn zeros_outside(
    choice: &ChoiceFunction,
    free: &CoalitionDescriptor,
) -> Result<PartialAssignment, AssignmentError> {
    PartialAssignment::new(
        choice.alphabet(),
        free.clone(),
        BTreeMap::new(),
        EventuallyPeriodicSeq::constant(choice.alphabet(), 0),
    )
}

/// Looks for a coalition in the family that has no say.
///
/// The complement of the support is tried first: it is cofinite, has density
/// one, and pinning the whole support trivially freezes the outcome.  For the
/// co-singleton family, where that shortcut needs a support of size at most
/// one, the search continues over every coalition missing a single supported
/// coordinate and every pinned value, which exhausts the family.
pub fn is_anti_democratic(
    choice: &ChoiceFunction,
    family: &CoalitionFamily,
) -> Result<AntiDemocracy, CoalitionError> {
    let outside_support =
        CoalitionDescriptor::finite(choice.support.iter().copied()).complement();
    if family.admits(&outside_support)? {
        let assignment = zeros_outside(choice, &outside_support)?;
        if let Irrelevance::Irrelevant { .. } =
            is_irrelevant(choice, &outside_support, &assignment)?
        {
            return Ok(AntiDemocracy::Yes {
                coalition: outside_support,
                assignment,
            });
        }
    }
    if *family == CoalitionFamily::CoSingleton {
        let everyone = CoalitionDescriptor::everything();
        let unconstrained = PartialAssignment::unconstrained(choice.alphabet());
        if let Irrelevance::Irrelevant { .. } =
            is_irrelevant(choice, &everyone, &unconstrained)?
        {
            return Ok(AntiDemocracy::Yes {
                coalition: everyone,
                assignment: unconstrained,
            });
        }
        for &n in &choice.support {
            let coalition = CoalitionDescriptor::finite([n]).complement();
            for v in 0..choice.k {
                let assignment = PartialAssignment::new(
                    choice.alphabet(),
                    coalition.clone(),
                    BTreeMap::from([(n, v)]),
                    EventuallyPeriodicSeq::constant(choice.alphabet(), 0),
                )?;
                if let Irrelevance::Irrelevant { .. } =
                    is_irrelevant(choice, &coalition, &assignment)?
                {
                    return Ok(AntiDemocracy::Yes {
                        coalition,
                        assignment,
                    });
                }
            }
        }
    }
    Ok(AntiDemocracy::NoWithinSearchSpace)
}

/// Restricted search over caller-supplied candidate coalitions, in order.
///
/// For each candidate in the family, every assignment of the bound supported
/// coordinates is tried, lexicographically least first, so the total work per
/// candidate is at most one evaluation per assignment to the whole support.
pub fn is_anti_democratic_among(
    choice: &ChoiceFunction,
    family: &CoalitionFamily,
    candidates: &[CoalitionDescriptor],
) -> Result<AntiDemocracy, CoalitionError> {
    for candidate in candidates {
        if !family.admits(candidate)? {
            continue;
        }
        let bound_s: Vec<u64> = choice
            .support
            .iter()
            .copied()
            .filter(|&s| !candidate.contains(s))
            .collect();
        let outer = (choice.k as u128)
            .checked_pow(bound_s.len() as u32)
            .unwrap_or(u128::MAX);
        let total = (choice.k as u128)
            .checked_pow(choice.support.len() as u32)
            .unwrap_or(u128::MAX);
        if total > DEFAULT_EVAL_CAP as u128 {
            return Err(CoalitionError::CapExceeded {
                required: total,
                cap: DEFAULT_EVAL_CAP,
            });
        }
        for w in 0..outer {
            let pins = decode(choice.k, bound_s.len(), w);
            let explicit: BTreeMap<u64, u64> =
                bound_s.iter().copied().zip(pins.iter().copied()).collect();
            let assignment = PartialAssignment::new(
                choice.alphabet(),
                candidate.clone(),
                explicit,
                EventuallyPeriodicSeq::constant(choice.alphabet(), 0),
            )?;
            if let Irrelevance::Irrelevant { .. } =
                is_irrelevant(choice, candidate, &assignment)?
            {
                return Ok(AntiDemocracy::Yes {
                    coalition: candidate.clone(),
                    assignment,
                });
            }
        }
    }
    Ok(AntiDemocracy::NoWithinSearchSpace)
}

/// A finite union of basic clopen pieces, each pinning finitely many
/// coordinates, all below the stated depth.  Membership is settled by any
/// prefix of that length.
#[derive(Debug, Clone)]
pub struct OpenSetApprox {
    alphabet: Alphabet,
    pieces: Vec<Cylinder>,
    // One pin list per piece: (coordinate, value), coordinates increasing.
    pins: Vec<Vec<(u64, u64)>>,
    depth: u64,
}

impl OpenSetApprox {
    pub fn new(
        alphabet: Alphabet,
        pieces: Vec<Cylinder>,
        depth: u64,
    ) -> Result<Self, CoalitionError> {
        let mut pins = Vec::with_capacity(pieces.len());
        for piece in &pieces {
            if piece.assignment().alphabet() != alphabet {
                return Err(CoalitionError::AlphabetMismatch);
            }
            let dom = piece.assignment().free().clone().complement();
            let coords = finite_elements(&dom)?.ok_or(CoalitionError::PieceNotClopen)?;
            let mut list = Vec::with_capacity(coords.len());
            for n in coords {
                if n >= depth {
                    return Err(CoalitionError::DepthTooShallow {
                        coordinate: n,
                        depth,
                    });
                }
                let v = piece
                    .assignment()
                    .value_at(n)
                    .expect("pinned coordinates have values");
                list.push((n, v));
            }
            pins.push(list);
        }
        Ok(OpenSetApprox {
            alphabet,
            pieces,
            pins,
            depth,
        })
    }

    /// The trivial approximation: one piece pinning nothing.
    pub fn whole_space(alphabet: Alphabet) -> Self {
        let piece = Cylinder::new(PartialAssignment::unconstrained(alphabet));
        Self::new(alphabet, vec![piece], 0).expect("an unconstrained piece pins nothing")
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn pieces(&self) -> &[Cylinder] {
        &self.pieces
    }

    pub fn depth(&self) -> u64 {
        self.depth
    }

    pub fn contains(&self, x: &EventuallyPeriodicSeq) -> bool {
        self.pins
            .iter()
            .any(|list| list.iter().all(|&(n, v)| x.eval(n) == v))
    }
}

/// [`is_irrelevant`] with the cylinder further cut down by an open set.
///
/// Pieces incompatible with the assignment drop out; a piece may pin some
/// coalition coordinates, shrinking its completion space.  Outcomes are
/// collected across all surviving pieces in order, least completion first.
/// An empty restriction is reported as [`CoalitionError::Vacuous`].
pub fn h_almost_irrelevant(
    choice: &ChoiceFunction,
    coalition: &CoalitionDescriptor,
    assignment: &PartialAssignment,
    open: &OpenSetApprox,
) -> Result<Irrelevance, CoalitionError> {
    if assignment.alphabet() != choice.alphabet() || open.alphabet != choice.alphabet() {
        return Err(CoalitionError::AlphabetMismatch);
    }
    if !assignment.free().equivalent(coalition)? {
        return Err(CoalitionError::FreeMismatch);
    }
    // (pins, free supported coordinates the piece leaves open)
    let mut plans: Vec<(&[(u64, u64)], Vec<u64>)> = Vec::new();
    let mut total = 0u128;
    for list in &open.pins {
        let compatible = list.iter().all(|&(n, v)| match assignment.value_at(n) {
            Some(w) => w == v,
            None => true,
        });
        if !compatible {
            continue;
        }
        let free_s: Vec<u64> = choice
            .support
            .iter()
            .copied()
            .filter(|&s| coalition.contains(s) && !list.iter().any(|&(n, _)| n == s))
            .collect();
        total += (choice.k as u128)
            .checked_pow(free_s.len() as u32)
            .unwrap_or(u128::MAX);
        plans.push((list, free_s));
    }
    if plans.is_empty() {
        return Err(CoalitionError::Vacuous);
    }
    if total > DEFAULT_EVAL_CAP as u128 {
        return Err(CoalitionError::CapExceeded {
            required: total,
            cap: DEFAULT_EVAL_CAP,
        });
    }
    let mut first: Option<(u64, EventuallyPeriodicSeq)> = None;
    for (list, free_s) in &plans {
        let count = (choice.k as u128)
            .checked_pow(free_s.len() as u32)
            .unwrap_or(u128::MAX);
        for c in 0..count {
            let digits = decode(choice.k, free_s.len(), c);
            let value = choice.eval_at(|s| {
                if let Some(&(_, v)) = list.iter().find(|&&(n, _)| n == s) {
                    return v;
                }
                match free_s.iter().position(|&t| t == s) {
                    Some(i) => digits[i],
                    None => assignment
                        .value_at(s)
                        .expect("coordinates outside the coalition are pinned"),
                }
            });
            match &first {
                None => {
                    let mut extra = list.to_vec();
                    extra.extend(free_s.iter().copied().zip(digits.iter().copied()));
                    first = Some((value, materialize(assignment, &extra)));
                }
                Some((settled, witness)) if value != *settled => {
                    let mut extra = list.to_vec();
                    extra.extend(free_s.iter().copied().zip(digits.iter().copied()));
                    return Ok(Irrelevance::Relevant {
                        witnesses: (witness.clone(), materialize(assignment, &extra)),
                    });
                }
                Some(_) => {}
            }
        }
    }
    let (value, _) = first.expect("at least one piece survived");
    Ok(Irrelevance::Irrelevant { value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::{cylinder_member, Membership};
    use crate::q;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ones() -> EventuallyPeriodicSeq {
        EventuallyPeriodicSeq::binary(vec![], vec![1]).unwrap()
    }

    fn zero_tail(k: u64) -> EventuallyPeriodicSeq {
        EventuallyPeriodicSeq::constant(Alphabet::Bounded(k), 0)
    }

    #[test]
    fn rule_outcomes_on_fixed_streams() {
        let d = ChoiceFunction::dictator(2, [0], 0).unwrap();
        assert_eq!(d.eval(&ones()), 1);

        let m = ChoiceFunction::majority(2, 0..5, 0).unwrap();
        let alternating = EventuallyPeriodicSeq::binary(vec![], vec![1, 0]).unwrap();
        assert_eq!(m.eval(&alternating), 1);

        let p = ChoiceFunction::parity(0..4);
        assert_eq!(p.eval(&ones()), 0);

        let xor = ChoiceFunction::table(2, [0, 1], vec![0, 1, 1, 0]).unwrap();
        let zero_one = EventuallyPeriodicSeq::binary(vec![], vec![0, 1]).unwrap();
        assert_eq!(xor.eval(&zero_one), 1);

        let c = ChoiceFunction::constant(3, 2).unwrap();
        assert_eq!(c.eval(&EventuallyPeriodicSeq::constant(Alphabet::Bounded(3), 1)), 2);
    }

    #[test]
    fn construction_rejects_malformed_rules() {
        assert!(matches!(
            ChoiceFunction::dictator(2, [1, 2], 0),
            Err(CoalitionError::DictatorOutsideSupport(0))
        ));
        assert!(matches!(
            ChoiceFunction::table(2, [0, 1], vec![0, 1, 1]),
            Err(CoalitionError::TableSizeMismatch { expected: 4, got: 3 })
        ));
        assert!(matches!(
            ChoiceFunction::table(2, [0], vec![0, 2]),
            Err(CoalitionError::ValueOutOfAlphabet { value: 2, k: 2 })
        ));
        assert!(matches!(
            ChoiceFunction::constant(2, 5),
            Err(CoalitionError::ValueOutOfAlphabet { value: 5, k: 2 })
        ));
        assert!(matches!(
            ChoiceFunction::majority(1, [0], 0),
            Err(CoalitionError::AlphabetTooSmall(1))
        ));
    }

    #[test]
    fn outcome_ignores_everything_off_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = ChoiceFunction::majority(2, [1, 3, 5], 1).unwrap();
        for _ in 0..40 {
            let on: Vec<(u64, u64)> = [1, 3, 5]
                .into_iter()
                .map(|n| (n, rng.gen_range(0..2)))
                .collect();
            let x = zero_tail(2).with_overrides(&on).unwrap();
            let mut noise = on.clone();
            for n in [0, 2, 4, 7, 9] {
                noise.push((n, rng.gen_range(0..2)));
            }
            let y = zero_tail(2).with_overrides(&noise).unwrap();
            assert_eq!(f.eval(&x), f.eval(&y));
        }
    }

    #[test]
    fn pinned_dictator_settles_the_rest_of_society() {
        let f = ChoiceFunction::dictator(2, [0], 0).unwrap();
        let others = CoalitionDescriptor::finite([0]).complement();
        let pinned = PartialAssignment::new(
            Alphabet::Bounded(2),
            others.clone(),
            BTreeMap::from([(0, 1)]),
            zero_tail(2),
        )
        .unwrap();
        match is_irrelevant(&f, &others, &pinned).unwrap() {
            Irrelevance::Irrelevant { value } => assert_eq!(value, 1),
            other => panic!("expected a settled outcome, got {other:?}"),
        }
    }

    #[test]
    fn lone_parity_voter_still_matters() {
        let f = ChoiceFunction::parity(0..4);
        let lone = CoalitionDescriptor::finite([2]);
        let pinned = PartialAssignment::new(
            Alphabet::Bounded(2),
            lone.clone(),
            BTreeMap::new(),
            zero_tail(2),
        )
        .unwrap();
        match is_irrelevant(&f, &lone, &pinned).unwrap() {
            Irrelevance::Relevant { witnesses: (y, z) } => {
                assert_eq!(f.eval(&y), 0);
                assert_eq!(f.eval(&z), 1);
                let horizon = y.decision_window(&z);
                let diff: Vec<u64> = (0..horizon).filter(|&n| y.eval(n) != z.eval(n)).collect();
                assert_eq!(diff, vec![2]);
                let cyl = pinned.clone().cylinder();
                assert!(matches!(
                    cylinder_member(&y, &cyl, horizon).unwrap(),
                    Membership::AgreesToDepth(_)
                ));
                assert!(matches!(
                    cylinder_member(&z, &cyl, horizon).unwrap(),
                    Membership::AgreesToDepth(_)
                ));
            }
            other => panic!("expected witnesses, got {other:?}"),
        }
    }

    #[test]
    fn settled_majority_ignores_the_minority_pair() {
        let f = ChoiceFunction::majority(2, 0..5, 0).unwrap();
        let pair = CoalitionDescriptor::finite([3, 4]);
        let pinned = PartialAssignment::new(
            Alphabet::Bounded(2),
            pair.clone(),
            BTreeMap::from([(0, 1), (1, 1), (2, 1)]),
            zero_tail(2),
        )
        .unwrap();
        match is_irrelevant(&f, &pair, &pinned).unwrap() {
            Irrelevance::Irrelevant { value } => assert_eq!(value, 1),
            other => panic!("expected a settled outcome, got {other:?}"),
        }
    }

    #[test]
    fn mismatched_free_set_is_rejected() {
        let f = ChoiceFunction::parity(0..2);
        let pinned = PartialAssignment::new(
            Alphabet::Bounded(2),
            CoalitionDescriptor::finite([1]),
            BTreeMap::new(),
            zero_tail(2),
        )
        .unwrap();
        let other = CoalitionDescriptor::finite([0]);
        assert!(matches!(
            is_irrelevant(&f, &other, &pinned),
            Err(CoalitionError::FreeMismatch)
        ));
    }

    #[test]
    fn completion_cap_is_enforced() {
        let f = ChoiceFunction::parity(0..8);
        let all = CoalitionDescriptor::everything();
        let open = PartialAssignment::unconstrained(Alphabet::Bounded(2));
        assert!(matches!(
            is_irrelevant_capped(&f, &all, &open, 100),
            Err(CoalitionError::CapExceeded { required: 256, cap: 100 })
        ));
    }

    fn random_choice(rng: &mut ChaCha8Rng, k: u64) -> ChoiceFunction {
        let size = rng.gen_range(1..=4usize);
        let mut support = BTreeSet::new();
        while support.len() < size {
            support.insert(rng.gen_range(0..12u64));
        }
        let support: Vec<u64> = support.into_iter().collect();
        match rng.gen_range(0..5) {
            0 => {
                let i = support[rng.gen_range(0..support.len())];
                ChoiceFunction::dictator(k, support.clone(), i).unwrap()
            }
            1 if k == 2 => ChoiceFunction::parity(support.clone()),
            2 => ChoiceFunction::majority(k, support.clone(), rng.gen_range(0..k)).unwrap(),
            3 => {
                let len = (k as usize).pow(support.len() as u32);
                let entries = (0..len).map(|_| rng.gen_range(0..k)).collect();
                ChoiceFunction::table(k, support.clone(), entries).unwrap()
            }
            _ => ChoiceFunction::constant(k, rng.gen_range(0..k)).unwrap(),
        }
    }

    fn random_coalition(rng: &mut ChaCha8Rng) -> CoalitionDescriptor {
        let finite_part = |rng: &mut ChaCha8Rng| {
            let picks: BTreeSet<u64> = (0..12).filter(|_| rng.gen_bool(0.4)).collect();
            CoalitionDescriptor::finite(picks)
        };
        match rng.gen_range(0..4) {
            0 => finite_part(rng),
            1 => finite_part(rng).complement(),
            2 => CoalitionDescriptor::arith(rng.gen_range(0..4), rng.gen_range(1..4)),
            _ => finite_part(rng).union(CoalitionDescriptor::arith(
                rng.gen_range(0..4),
                rng.gen_range(2..5),
            )),
        }
    }

    fn random_assignment(
        rng: &mut ChaCha8Rng,
        k: u64,
        free: &CoalitionDescriptor,
    ) -> PartialAssignment {
        let mut explicit = BTreeMap::new();
        for n in 0..16 {
            if !free.contains(n) && rng.gen_bool(0.5) {
                explicit.insert(n, rng.gen_range(0..k));
            }
        }
        let period: Vec<u64> = (0..rng.gen_range(1..=3))
            .map(|_| rng.gen_range(0..k))
            .collect();
        let tail =
            EventuallyPeriodicSeq::new(Alphabet::Bounded(k), vec![], period).unwrap();
        PartialAssignment::new(Alphabet::Bounded(k), free.clone(), explicit, tail).unwrap()
    }

    // Same decision by a different route: build each completion as a full
    // stream and run the rule on it.
    fn exhaustive_outcomes(
        choice: &ChoiceFunction,
        coalition: &CoalitionDescriptor,
        assignment: &PartialAssignment,
    ) -> Vec<u64> {
        let free_s: Vec<u64> = choice
            .support()
            .iter()
            .copied()
            .filter(|&s| coalition.contains(s))
            .collect();
        let k = choice.alphabet_size();
        let total = (k as u128).pow(free_s.len() as u32);
        (0..total)
            .map(|c| {
                let digits = decode(k, free_s.len(), c);
                let extra: Vec<(u64, u64)> =
                    free_s.iter().copied().zip(digits).collect();
                choice.eval(&materialize(assignment, &extra))
            })
            .collect()
    }

    #[test]
    fn decision_matches_streamwise_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for round in 0..60 {
            let k = if round % 3 == 0 { 3 } else { 2 };
            let choice = random_choice(&mut rng, k);
            let coalition = random_coalition(&mut rng);
            let assignment = random_assignment(&mut rng, k, &coalition);
            let outcomes = exhaustive_outcomes(&choice, &coalition, &assignment);
            let all_equal = outcomes.iter().all(|&v| v == outcomes[0]);
            match is_irrelevant(&choice, &coalition, &assignment).unwrap() {
                Irrelevance::Irrelevant { value } => {
                    assert!(all_equal, "round {round}: enumeration saw a split");
                    assert_eq!(value, outcomes[0], "round {round}");
                }
                Irrelevance::Relevant { witnesses: (y, z) } => {
                    assert!(!all_equal, "round {round}: enumeration was constant");
                    assert_ne!(choice.eval(&y), choice.eval(&z), "round {round}");
                    let cyl = assignment.clone().cylinder();
                    let horizon = y.decision_window(&z).max(32);
                    for w in [&y, &z] {
                        assert!(matches!(
                            cylinder_member(w, &cyl, horizon).unwrap(),
                            Membership::AgreesToDepth(_)
                        ));
                    }
                    for n in (0..horizon).filter(|&n| y.eval(n) != z.eval(n)) {
                        assert!(coalition.contains(n), "round {round}: stray diff at {n}");
                        assert!(choice.support().contains(&n));
                    }
                }
            }
        }
    }

    #[test]
    fn shrinking_a_powerless_coalition_keeps_it_powerless() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 25 {
            let choice = random_choice(&mut rng, 2);
            let coalition = random_coalition(&mut rng);
            let assignment = random_assignment(&mut rng, 2, &coalition);
            let Irrelevance::Irrelevant { value } =
                is_irrelevant(&choice, &coalition, &assignment).unwrap()
            else {
                continue;
            };
            let drops: Vec<u64> = (0..12).filter(|&n| coalition.contains(n)).take(2).collect();
            if drops.is_empty() {
                continue;
            }
            let mut smaller = coalition.clone();
            let mut extended = assignment.clone();
            for &n in &drops {
                smaller = smaller.intersection(CoalitionDescriptor::finite([n]).complement());
                extended = extended.with_value(n, rng.gen_range(0..2)).unwrap();
            }
            match is_irrelevant(&choice, &smaller, &extended).unwrap() {
                Irrelevance::Irrelevant { value: v } => assert_eq!(v, value),
                other => panic!("shrunk coalition became relevant: {other:?}"),
            }
            checked += 1;
        }
    }

    #[test]
    fn support_complement_witnesses_every_family_that_admits_it() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let families = [
            CoalitionFamily::Infinite,
            CoalitionFamily::DenseAtLeast(q(0, 1)),
            CoalitionFamily::DenseAtLeast(q(1, 2)),
            CoalitionFamily::DenseAtLeast(q(1, 1)),
            CoalitionFamily::Cofinite,
        ];
        for _ in 0..10 {
            let choice = random_choice(&mut rng, 2);
            for family in &families {
                match is_anti_democratic(&choice, family).unwrap() {
                    AntiDemocracy::Yes { coalition, assignment } => {
                        assert!(family.admits(&coalition).unwrap());
                        assert!(matches!(
                            is_irrelevant(&choice, &coalition, &assignment).unwrap(),
                            Irrelevance::Irrelevant { .. }
                        ));
                    }
                    AntiDemocracy::NoWithinSearchSpace => {
                        panic!("cofinite shortcut should settle {family:?}")
                    }
                }
            }
        }
    }

    #[test]
    fn dictatorship_loses_to_everyone_but_the_dictator() {
        let f = ChoiceFunction::dictator(2, [0], 0).unwrap();
        match is_anti_democratic(&f, &CoalitionFamily::CoSingleton).unwrap() {
            AntiDemocracy::Yes { coalition, assignment } => {
                let missing = finite_elements(&coalition.clone().complement()).unwrap();
                assert_eq!(missing, Some(vec![0]));
                assert!(matches!(
                    is_irrelevant(&f, &coalition, &assignment).unwrap(),
                    Irrelevance::Irrelevant { .. }
                ));
            }
            AntiDemocracy::NoWithinSearchSpace => panic!("dictator should be found"),
        }
    }

    #[test]
    fn constant_rule_ignores_the_whole_society() {
        let f = ChoiceFunction::constant(2, 0).unwrap();
        match is_anti_democratic(&f, &CoalitionFamily::Infinite).unwrap() {
            AntiDemocracy::Yes { coalition, assignment } => {
                assert!(coalition
                    .equivalent(&CoalitionDescriptor::everything())
                    .unwrap());
                assert!(assignment.explicit().is_empty());
            }
            AntiDemocracy::NoWithinSearchSpace => panic!("constants ignore everyone"),
        }
    }

    #[test]
    fn genuine_parity_rule_has_no_co_singleton_witness() {
        let f = ChoiceFunction::parity(0..4);
        assert!(matches!(
            is_anti_democratic(&f, &CoalitionFamily::CoSingleton).unwrap(),
            AntiDemocracy::NoWithinSearchSpace
        ));
    }

    #[test]
    fn candidate_search_reports_its_own_limits() {
        let f = ChoiceFunction::parity([0, 1]);
        let evens = CoalitionDescriptor::arith(0, 2);
        assert!(matches!(
            is_anti_democratic_among(&f, &CoalitionFamily::Infinite, &[evens]).unwrap(),
            AntiDemocracy::NoWithinSearchSpace
        ));
        let past_support = CoalitionDescriptor::finite([0, 1]).complement();
        match is_anti_democratic_among(&f, &CoalitionFamily::Infinite, &[past_support]).unwrap()
        {
            AntiDemocracy::Yes { assignment, .. } => {
                assert_eq!(assignment.explicit(), &BTreeMap::from([(0, 0), (1, 0)]));
            }
            AntiDemocracy::NoWithinSearchSpace => panic!("pinning the support works"),
        }
    }

    fn one_pin_piece(n: u64, v: u64) -> Cylinder {
        Cylinder::new(
            PartialAssignment::new(
                Alphabet::Bounded(2),
                CoalitionDescriptor::finite([n]).complement(),
                BTreeMap::from([(n, v)]),
                zero_tail(2),
            )
            .unwrap(),
        )
    }

    #[test]
    fn whole_space_restriction_changes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let open = OpenSetApprox::whole_space(Alphabet::Bounded(2));
        for _ in 0..20 {
            let choice = random_choice(&mut rng, 2);
            let coalition = random_coalition(&mut rng);
            let assignment = random_assignment(&mut rng, 2, &coalition);
            let plain = is_irrelevant(&choice, &coalition, &assignment).unwrap();
            let cut = h_almost_irrelevant(&choice, &coalition, &assignment, &open).unwrap();
            match (plain, cut) {
                (
                    Irrelevance::Irrelevant { value: a },
                    Irrelevance::Irrelevant { value: b },
                ) => assert_eq!(a, b),
                (Irrelevance::Relevant { .. }, Irrelevance::Relevant { witnesses: (y, z) }) => {
                    assert_ne!(choice.eval(&y), choice.eval(&z));
                }
                (a, b) => panic!("verdicts split: {a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn open_set_can_pin_the_deciding_voter() {
        let f = ChoiceFunction::parity([0, 1]);
        let lone = CoalitionDescriptor::finite([1]);
        let pinned = PartialAssignment::new(
            Alphabet::Bounded(2),
            lone.clone(),
            BTreeMap::new(),
            zero_tail(2),
        )
        .unwrap();
        let one_side =
            OpenSetApprox::new(Alphabet::Bounded(2), vec![one_pin_piece(1, 0)], 2).unwrap();
        match h_almost_irrelevant(&f, &lone, &pinned, &one_side).unwrap() {
            Irrelevance::Irrelevant { value } => assert_eq!(value, 0),
            other => panic!("expected the pinned side only, got {other:?}"),
        }
        let both_sides = OpenSetApprox::new(
            Alphabet::Bounded(2),
            vec![one_pin_piece(1, 0), one_pin_piece(1, 1)],
            2,
        )
        .unwrap();
        match h_almost_irrelevant(&f, &lone, &pinned, &both_sides).unwrap() {
            Irrelevance::Relevant { witnesses: (y, z) } => {
                assert_ne!(f.eval(&y), f.eval(&z));
                assert!(both_sides.contains(&y) && both_sides.contains(&z));
            }
            other => panic!("expected both sides reachable, got {other:?}"),
        }
    }

    #[test]
    fn incompatible_open_set_is_vacuous() {
        let f = ChoiceFunction::dictator(2, [0], 0).unwrap();
        let others = CoalitionDescriptor::finite([0]).complement();
        let pinned = PartialAssignment::new(
            Alphabet::Bounded(2),
            others.clone(),
            BTreeMap::from([(0, 1)]),
            zero_tail(2),
        )
        .unwrap();
        let clash = OpenSetApprox::new(Alphabet::Bounded(2), vec![one_pin_piece(0, 0)], 1)
            .unwrap();
        assert!(matches!(
            h_almost_irrelevant(&f, &others, &pinned, &clash),
            Err(CoalitionError::Vacuous)
        ));
    }

    #[test]
    fn open_set_depth_must_cover_every_pin() {
        assert!(matches!(
            OpenSetApprox::new(Alphabet::Bounded(2), vec![one_pin_piece(5, 1)], 3),
            Err(CoalitionError::DepthTooShallow { coordinate: 5, depth: 3 })
        ));
        let ok = OpenSetApprox::new(Alphabet::Bounded(2), vec![one_pin_piece(5, 1)], 6).unwrap();
        let x = zero_tail(2).with_overrides(&[(5, 1)]).unwrap();
        assert!(ok.contains(&x));
        assert!(!ok.contains(&zero_tail(2)));
    }
}
