//! Recursive constructions: dense-set refinement of binary trees, finite
//! conditions and their density boosting, partition monochromatization, and
//! the staircase witnesses over unbounded-value streams.

pub mod delta_tree;
pub mod forcing;
pub mod mono;
pub mod staircase;

pub use delta_tree::{
    audit_csv, build_delta_tree, AuditRow, DeltaError, DeltaRun, DenseOracle, StageSegment,
    StagedTree,
};
pub use forcing::{densify, meet_dense, ForcingError, SpineMap, UniformFiniteTree};
pub use mono::{
    bit_partitions, monochromatize, monochromatize_capped, BinaryPartition, MonoError,
    MonochromeOutcome,
};
pub use staircase::{
    default_value_bound, e_word, escape_witness, h_map, in_cn, oplus, witness_in_f, witness_out_f,
    CnMembership, EscapeWitness, OutsideWitness, StaircaseError,
};

use crate::seqcore::FiniteTree;

/// One node word per line, children indented under their parent.
pub fn tree_text(tree: &FiniteTree) -> String {
    fn walk(tree: &FiniteTree, word: &mut Vec<u64>, depth: usize, out: &mut String) {
        out.push_str(&"  ".repeat(depth));
        out.push('[');
        let symbols: Vec<String> = word.iter().map(u64::to_string).collect();
        out.push_str(&symbols.join(" "));
        out.push_str("]\n");
        for c in tree.children(word) {
            word.push(c);
            walk(tree, word, depth + 1, out);
            word.pop();
        }
    }
    let mut out = String::new();
    if !tree.is_empty() {
        walk(tree, &mut Vec::new(), 0, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_rendering_indents_children() {
        let tree = FiniteTree::new(2, vec![vec![0, 0], vec![0, 1], vec![1, 1]]).unwrap();
        assert_eq!(
            tree_text(&tree),
            "[]\n  [0]\n    [0 0]\n    [0 1]\n  [1]\n    [1 1]\n"
        );
        let empty = FiniteTree::new(2, Vec::<Vec<u64>>::new()).unwrap();
        assert_eq!(tree_text(&empty), "");
    }
}
