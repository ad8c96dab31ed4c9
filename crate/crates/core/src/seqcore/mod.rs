//! Shared substrate: sequences, coalition descriptors, partial assignments,
//! cylinders and finite trees. Everything downstream builds on these.

pub mod assignment;
pub mod descriptor;
pub mod stream;
pub mod tree;

pub use assignment::{cylinder_member, AssignmentError, Cylinder, Membership, PartialAssignment};
pub use descriptor::{CoalitionDescriptor, NormalForm, NormalizeError};
pub use stream::{Alphabet, EventuallyPeriodicSeq, StreamError};
pub use tree::{splitting_report, tree_of, FiniteTree, SplittingReport, TreeError};
