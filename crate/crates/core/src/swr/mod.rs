//! Social welfare relations as checkable derivations.
//!
//! Utility streams over a finite chain of levels are never ranked by a
//! decision procedure here; the ambient welfare relation is an oracle.  What
//! the module does is *certify* rankings: a [`Derivation`] chains steps of
//! three audit-able kinds (finite rearrangement, one poor/rich transfer,
//! pointwise dominance) and [`check_derivation`] replays it mechanically.
//!
//! The block decomposition of a binary selector ([`decompose`]) induces two
//! canonical utility maps ([`oe_maps`]).  Calling the class of selectors
//! whose even-favoring map ranks strictly above its odd-favoring one the
//! *even-top class*, [`case_witness`] produces two members of a given
//! cylinder on opposite sides of that class, together with derivations
//! certifying the split under each possible case of the ambient relation.

pub mod cert;
pub mod decompose;
pub mod perm;
pub mod steps;
pub mod witness;

pub use cert::{check_certificate, CertDocument, CertError, CertStep};
pub use decompose::{decompose, oe_maps, Decomposition, Region};
pub use perm::{FinitePermutation, PermError};
pub use steps::{
    check_derivation, check_step, rearranged, Derivation, DerivationError, DerivationStep,
    Relation, StepError, StepKind,
};
pub use witness::{case_witness, CaseAssumption, WitnessBundle};

use thiserror::Error;

use crate::density::DensityError;
use crate::seqcore::{AssignmentError, EventuallyPeriodicSeq, StreamError};
use crate::Q;

/// An infinite utility stream; levels are compared by their numeric value.
pub type UtilityStream = EventuallyPeriodicSeq;

/// The four-level scale `a < b < c < d`, encoded as `0 < 1 < 2 < 3`.
pub mod scale {
    pub const A: u64 = 0;
    pub const B: u64 = 1;
    pub const C: u64 = 2;
    pub const D: u64 = 3;
}

/// Which axiom pair the witness constructions target, and with it the
/// utility scale and the grain of the block decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Transfer steps plus rearrangements; four levels, two coordinates of
    /// utility space per selector coordinate.
    EquityAnonymity,
    /// Dominance steps plus rearrangements; two levels, unit grain.
    ParetoAnonymity,
}

impl Variant {
    /// Blocks span doubled coordinate ranges under the four-level scale.
    pub fn paired(self) -> bool {
        matches!(self, Variant::EquityAnonymity)
    }

    /// Number of utility levels in play.
    pub fn levels(self) -> u64 {
        match self {
            Variant::EquityAnonymity => 4,
            Variant::ParetoAnonymity => 2,
        }
    }
}

#[derive(Debug, Error)]
pub enum SwrError {
    #[error("selector stream must be binary")]
    NotBinary,
    #[error("selector has finitely many ones")]
    FinitelyManyOnes,
    #[error("the condition needs infinitely many free coordinates")]
    NotSilver,
    #[error("density threshold {0} does not exceed 2/3")]
    DeltaTooSmall(Q),
    #[error("needed {needed} disjoint free runs below horizon {horizon}, found {found}")]
    InsufficientTriples { needed: u64, found: u64, horizon: u64 },
    #[error("residual mismatch at coordinate {coordinate} is not an inward transfer")]
    UnrepairableGap { coordinate: u64 },
    #[error("derivation {index} failed its audit: {source}")]
    DerivationRejected { index: usize, source: DerivationError },
    #[error("constructed member leaves the cylinder at coordinate {0}")]
    OutsideCylinder(u64),
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Permutation(#[from] PermError),
}
