//! Desk-scale laboratory for cylinder conditions on sequence spaces, coalition
//! densities, irrelevance of coalitions under social choice functions, and
//! equity-style derivations between utility streams.
//!
//! The crate is organized around a shared substrate of finitely described
//! infinite objects ([`seqcore`]): eventually periodic sequences, symbolic
//! coalition descriptors, partial assignments with their cylinders, and
//! finite trees. On top of that sit density computations ([`density`]),
//! choice-function irrelevance probes ([`coalitions`]), the tree and witness
//! constructions ([`constructions`]), derivation certificates between utility
//! streams ([`swr`]), the scenario language ([`speclang`]) and the batch
//! command-line front end ([`cli`]).
//!
//! Everything is deterministic: no clocks, no threads, no hidden state.
//! Operations that could blow up structurally (tree materialization, sparse
//! set algebra) carry explicit caps and report them as errors instead of
//! degrading silently.

pub mod cli;
pub mod coalitions;
pub mod constructions;
pub mod density;
pub mod seqcore;
pub mod speclang;
pub mod swr;

pub use coalitions::{
    h_almost_irrelevant, is_anti_democratic, is_anti_democratic_among, is_irrelevant,
    AntiDemocracy, ChoiceFunction, ChoiceRule, CoalitionFamily, Irrelevance, OpenSetApprox,
};
pub use constructions::{
    build_delta_tree, densify, escape_witness, in_cn, meet_dense, monochromatize, oplus,
    witness_in_f, witness_out_f, CnMembership, DenseOracle, SpineMap, StagedTree,
    UniformFiniteTree,
};
pub use seqcore::{
    cylinder_member, splitting_report, tree_of, Alphabet, CoalitionDescriptor, Cylinder,
    EventuallyPeriodicSeq, FiniteTree, Membership, PartialAssignment, SplittingReport,
};
pub use swr::{
    case_witness, check_certificate, check_derivation, check_step, decompose, oe_maps,
    CaseAssumption, CertDocument, Decomposition, Derivation, DerivationStep, FinitePermutation,
    Relation, StepKind, SwrError, UtilityStream, Variant, WitnessBundle,
};

/// Exact rational with machine-word components.
pub type Q = num::rational::Ratio<u64>;

/// Shorthand rational constructor.
pub fn q(numer: u64, denom: u64) -> Q {
    Q::new(numer, denom)
}
