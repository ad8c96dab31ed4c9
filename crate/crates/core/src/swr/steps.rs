//! Derivation steps between utility streams and their mechanical replay.

use std::fmt;

use thiserror::Error;

use super::perm::FinitePermutation;
use super::UtilityStream;
use crate::seqcore::StreamError;

/// Widest coordinate window a comparison may scan.
pub const ALIGN_CAP: u64 = 1 << 22;

/// How a step or a chain ranks its target against its source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Equivalent,
    StrictlyBelow,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Equivalent => write!(f, "equiv"),
            Relation::StrictlyBelow => write!(f, "strict"),
        }
    }
}

/// The move a single step performs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepKind {
    /// Finite anonymity: `target(n) = source(perm(n))`.
    Anonymity(FinitePermutation),
    /// Strong equity: the poor coordinate `i` rises, the rich coordinate `j`
    /// falls, the raised value stays below the lowered one, all else is
    /// fixed.
    Equity { i: u64, j: u64 },
    /// Pareto dominance: pointwise at least, strictly somewhere.
    Dominance,
}

/// One audited move between two utility streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationStep {
    pub kind: StepKind,
    pub source: UtilityStream,
    pub target: UtilityStream,
    pub relation: Relation,
}

/// A chain of steps with matching endpoints and a claimed overall ranking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub steps: Vec<DerivationStep>,
    pub claimed: Relation,
}

impl Derivation {
    pub fn new(steps: Vec<DerivationStep>, claimed: Relation) -> Self {
        Derivation { steps, claimed }
    }

    /// Source of the first step.
    pub fn start(&self) -> Option<&UtilityStream> {
        self.steps.first().map(|s| &s.source)
    }

    /// Target of the last step.
    pub fn end(&self) -> Option<&UtilityStream> {
        self.steps.last().map(|s| &s.target)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StepError {
    #[error("streams use different alphabets")]
    AlphabetMismatch,
    #[error("a rearrangement must be claimed as an equivalence")]
    MisclaimedEquivalence,
    #[error("a transfer or dominance step must be claimed as strict")]
    MisclaimedStrictness,
    #[error("target differs from the rearranged source at coordinate {0}")]
    RearrangementMismatch(u64),
    #[error("equity step changes coordinate {0} outside its declared pair")]
    OffPairChange(u64),
    #[error("equity pair needs two distinct coordinates")]
    DegeneratePair,
    #[error("values at the pair do not interleave as poor < raised < lowered < rich")]
    NotInterleaved,
    #[error("target drops below source at coordinate {0}")]
    DominanceBroken(u64),
    #[error("dominance step needs at least one strict gain")]
    NoStrictGain,
    #[error("alignment window of {window} coordinates exceeds the cap of {cap}")]
    AlignmentFailure { window: u64, cap: u64 },
    #[error(transparent)]
    Stream(#[from] StreamError),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DerivationError {
    #[error("derivation chain is empty")]
    EmptyChain,
    #[error("step {index}: {source}")]
    Step { index: usize, source: StepError },
    #[error("step {index} does not begin at the previous step's target")]
    EndpointMismatch { index: usize },
    #[error("claimed {claimed} but the chain proves {computed}")]
    ClaimMismatch { claimed: Relation, computed: Relation },
}

/// The stream with coordinates rearranged: `n`-th value taken at `perm(n)`.
pub fn rearranged(x: &UtilityStream, perm: &FinitePermutation) -> UtilityStream {
    let overrides: Vec<(u64, u64)> = perm
        .support()
        .map(|n| (n, x.eval(perm.apply(n))))
        .collect();
    x.with_overrides(&overrides)
        .expect("rearranged values come from the same alphabet")
}

fn aligned_window(a: &UtilityStream, b: &UtilityStream) -> Result<u64, StepError> {
    let window = a.decision_window(b);
    if window > ALIGN_CAP {
        return Err(StepError::AlignmentFailure {
            window,
            cap: ALIGN_CAP,
        });
    }
    Ok(window)
}

pub fn check_step(step: &DerivationStep) -> Result<(), StepError> {
    if step.source.alphabet() != step.target.alphabet() {
        return Err(StepError::AlphabetMismatch);
    }
    match &step.kind {
        StepKind::Anonymity(perm) => {
            if step.relation != Relation::Equivalent {
                return Err(StepError::MisclaimedEquivalence);
            }
            let expected = rearranged(&step.source, perm);
            let window = aligned_window(&step.target, &expected)?;
            for n in 0..window {
                if step.target.eval(n) != expected.eval(n) {
                    return Err(StepError::RearrangementMismatch(n));
                }
            }
            Ok(())
        }
        StepKind::Equity { i, j } => {
            if step.relation != Relation::StrictlyBelow {
                return Err(StepError::MisclaimedStrictness);
            }
            let (i, j) = (*i, *j);
            if i == j {
                return Err(StepError::DegeneratePair);
            }
            let window = aligned_window(&step.source, &step.target)?;
            for n in 0..window {
                if n != i && n != j && step.source.eval(n) != step.target.eval(n) {
                    return Err(StepError::OffPairChange(n));
                }
            }
            let poor = step.source.eval(i);
            let raised = step.target.eval(i);
            let lowered = step.target.eval(j);
            let rich = step.source.eval(j);
            if !(poor < raised && raised < lowered && lowered < rich) {
                return Err(StepError::NotInterleaved);
            }
            Ok(())
        }
        StepKind::Dominance => {
            if step.relation != Relation::StrictlyBelow {
                return Err(StepError::MisclaimedStrictness);
            }
            let window = aligned_window(&step.source, &step.target)?;
            let mut strict = false;
            for n in 0..window {
                let s = step.source.eval(n);
                let t = step.target.eval(n);
                if s > t {
                    return Err(StepError::DominanceBroken(n));
                }
                strict |= s < t;
            }
            if !strict {
                return Err(StepError::NoStrictGain);
            }
            Ok(())
        }
    }
}

/// Replay a chain: every step must check, endpoints must compose, and the
/// claimed relation must match what the steps prove.  Strictness survives
/// composition with equivalences, so the chain is strict iff any step is.
pub fn check_derivation(d: &Derivation) -> Result<Relation, DerivationError> {
    if d.steps.is_empty() {
        return Err(DerivationError::EmptyChain);
    }
    let mut computed = Relation::Equivalent;
    for (index, step) in d.steps.iter().enumerate() {
        if index > 0 {
            let prev = &d.steps[index - 1].target;
            let window = aligned_window(prev, &step.source)
                .map_err(|source| DerivationError::Step { index, source })?;
            if (0..window).any(|n| prev.eval(n) != step.source.eval(n)) {
                return Err(DerivationError::EndpointMismatch { index });
            }
        }
        check_step(step).map_err(|source| DerivationError::Step { index, source })?;
        if step.relation == Relation::StrictlyBelow {
            computed = Relation::StrictlyBelow;
        }
    }
    if computed != d.claimed {
        return Err(DerivationError::ClaimMismatch {
            claimed: d.claimed,
            computed,
        });
    }
    Ok(computed)
}
