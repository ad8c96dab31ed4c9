//! Finite prefix-closed trees over a bounded alphabet.
//!
//! A [`FiniteTree`] is stored as its sorted terminal words; the node set is
//! the set of all their prefixes, so prefix-closure holds by construction.
//! The splitting structure (splitting nodes, splitting levels, the successor
//! map) is read off the terminals by walking symbol groups.

use crate::seqcore::assignment::Cylinder;
use crate::seqcore::stream::Alphabet;
use crate::{q, Q};
use std::collections::BTreeSet;
use thiserror::Error;

/// Most terminals a materialized tree may carry.
const TERMINAL_CAP: u128 = 1 << 16;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum TreeError {
    #[error("only bounded alphabets can be materialized as trees")]
    UnboundedAlphabet,
    #[error("tree would have {0} terminals, over the cap of {TERMINAL_CAP}")]
    TooManyTerminals(u128),
    #[error("symbol {symbol} is outside the {k}-letter alphabet")]
    SymbolOutOfRange { symbol: u64, k: u64 },
    #[error("tree has no nodes")]
    EmptyTree,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteTree {
    k: u64,
    /// Sorted, mutually prefix-free; their prefixes form the node set.
    terminals: Vec<Vec<u64>>,
}

impl FiniteTree {
    /// Build from any finite word set; the tree is the downward closure, so
    /// words that are prefixes of others dissolve into interior nodes.
    pub fn new<I>(k: u64, words: I) -> Result<Self, TreeError>
    where
        I: IntoIterator<Item = Vec<u64>>,
    {
        let mut all: Vec<Vec<u64>> = words.into_iter().collect();
        for w in &all {
            if let Some(&symbol) = w.iter().find(|&&s| s >= k) {
                return Err(TreeError::SymbolOutOfRange { symbol, k });
            }
        }
        all.sort();
        all.dedup();
        // Drop proper prefixes; sorted order puts a prefix immediately
        // before its extensions.
        let mut terminals: Vec<Vec<u64>> = Vec::with_capacity(all.len());
        for w in all {
            while let Some(last) = terminals.last() {
                if w.starts_with(last) {
                    terminals.pop();
                } else {
                    break;
                }
            }
            terminals.push(w);
        }
        Ok(FiniteTree { k, terminals })
    }

    pub fn alphabet_size(&self) -> u64 {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.terminals.is_empty()
    }

    pub fn term(&self) -> &[Vec<u64>] {
        &self.terminals
    }

    /// Height: length of the longest node.
    pub fn ht(&self) -> u64 {
        self.terminals.iter().map(|t| t.len() as u64).max().unwrap_or(0)
    }

    /// Is `word` a node, i.e. a prefix of some terminal?
    pub fn contains(&self, word: &[u64]) -> bool {
        let (lo, hi) = self.extension_range(word);
        lo < hi
    }

    /// Distinct next symbols available at `word`.
    pub fn children(&self, word: &[u64]) -> Vec<u64> {
        let (lo, hi) = self.extension_range(word);
        let p = word.len();
        let mut out = Vec::new();
        for t in &self.terminals[lo..hi] {
            if t.len() > p {
                let s = t[p];
                if out.last() != Some(&s) {
                    out.push(s);
                }
            }
        }
        out
    }

    /// Terminals extending `word` sit in one contiguous sorted run.
    fn extension_range(&self, word: &[u64]) -> (usize, usize) {
        let lo = self.terminals.partition_point(|t| t.as_slice() < word);
        let hi = lo + self.terminals[lo..].partition_point(|t| t.starts_with(word));
        (lo, hi)
    }

    /// Nodes with at least two children.
    pub fn splitting_nodes(&self) -> Vec<Vec<u64>> {
        let mut out = Vec::new();
        self.visit(0, self.terminals.len(), 0, &mut |node, arity| {
            if arity >= 2 {
                out.push(node.to_vec());
            }
        });
        out
    }

    /// Splitting levels: one past the length of each splitting node.
    pub fn lev(&self) -> BTreeSet<u64> {
        let mut out = BTreeSet::new();
        self.visit(0, self.terminals.len(), 0, &mut |node, arity| {
            if arity >= 2 {
                out.insert(node.len() as u64 + 1);
            }
        });
        out
    }

    /// Shortest splitting node extending `word`, following the unique
    /// non-branching path; `None` when the branch dies out first.
    pub fn spl_succ(&self, word: &[u64]) -> Option<Vec<u64>> {
        if !self.contains(word) {
            return None;
        }
        let mut w = word.to_vec();
        loop {
            let ch = self.children(&w);
            match ch.len() {
                0 => return None,
                1 => w.push(ch[0]),
                _ => return Some(w),
            }
        }
    }

    /// Call `f(node, arity)` for every node, in depth-first sorted order.
    fn visit(&self, lo: usize, hi: usize, p: usize, f: &mut impl FnMut(&[u64], usize)) {
        if lo >= hi {
            return;
        }
        if hi - lo == 1 && self.terminals[lo].len() == p {
            f(&self.terminals[lo], 0);
            return;
        }
        // Group the run by the symbol at position p.
        let mut arity = 0;
        let mut i = lo;
        let mut groups: Vec<(usize, usize)> = Vec::new();
        while i < hi {
            let s = self.terminals[i][p];
            let mut j = i + 1;
            while j < hi && self.terminals[j][p] == s {
                j += 1;
            }
            groups.push((i, j));
            arity += 1;
            i = j;
        }
        f(&self.terminals[lo][..p], arity);
        for (glo, ghi) in groups {
            self.visit(glo, ghi, p + 1, f);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplittingReport {
    pub split_nodes: Vec<Vec<u64>>,
    pub lev: BTreeSet<u64>,
    pub ht: u64,
    /// |lev| / ht, the splitting-level share of the height.
    pub ratio: Q,
}

/// Splitting structure of a nonempty tree in one bundle.
pub fn splitting_report(tree: &FiniteTree) -> Result<SplittingReport, TreeError> {
    if tree.is_empty() {
        return Err(TreeError::EmptyTree);
    }
    let split_nodes = tree.splitting_nodes();
    let lev: BTreeSet<u64> = split_nodes.iter().map(|n| n.len() as u64 + 1).collect();
    let ht = tree.ht();
    let ratio = if ht == 0 {
        q(0, 1)
    } else {
        q(lev.len() as u64, ht)
    };
    Ok(SplittingReport {
        split_nodes,
        lev,
        ht,
        ratio,
    })
}

/// Depth-truncation of the cylinder's tree: words of length `depth` taking
/// the assigned value on bound coordinates and everything on free ones.
pub fn tree_of(c: &Cylinder, depth: u64) -> Result<FiniteTree, TreeError> {
    let f = c.assignment();
    let k = match f.alphabet() {
        Alphabet::Bounded(k) => k,
        Alphabet::Unbounded => return Err(TreeError::UnboundedAlphabet),
    };
    let free = f.free_below(depth);
    let count = (k as u128)
        .checked_pow(free.len() as u32)
        .unwrap_or(u128::MAX);
    if count > TERMINAL_CAP {
        return Err(TreeError::TooManyTerminals(count));
    }
    let mut terminals = Vec::with_capacity(count as usize);
    let mut digits = vec![0u64; free.len()];
    loop {
        let mut word = Vec::with_capacity(depth as usize);
        let mut fi = 0;
        for n in 0..depth {
            match f.value_at(n) {
                Some(v) => word.push(v),
                None => {
                    word.push(digits[fi]);
                    fi += 1;
                }
            }
        }
        terminals.push(word);
        // Odometer with the last free coordinate fastest keeps sorted order.
        let mut pos = digits.len();
        loop {
            if pos == 0 {
                return FiniteTree::new(k, terminals);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < k {
                break;
            }
            digits[pos] = 0;
        }
    }
}
