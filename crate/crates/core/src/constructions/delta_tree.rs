//! Round-by-round refinement of a binary tree through a chain of dense sets.
//!
//! Each round lands every branch inside the next dense set by threading one
//! shared word through all terminals, then restores branching by grafting a
//! full cube.  Heights grow factorially, so the tree is kept as a list of
//! shared-word and cube segments; splitting statistics have closed forms and
//! the explicit tree is materialized only when small enough.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::seqcore::{FiniteTree, TreeError};
use crate::{q, Q};

#[derive(Debug, Clone, PartialEq, Eq)]
enum OracleKind {
    /// Every word already qualifies.
    Identity,
    /// Streams containing the word as a factor; extension appends the word
    /// unless it already occurs.
    Factor(Vec<u64>),
    /// Always answers the same word, whether or not it extends the input.
    /// Exists to exercise the abort path.
    Fixed(Vec<u64>),
}

/// A dense set presented the way the constructions consume it: an extension
/// rule plus a membership predicate for finite words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseOracle {
    kind: OracleKind,
}

fn has_factor(t: &[u64], w: &[u64]) -> bool {
    w.is_empty() || t.windows(w.len()).any(|win| win == w)
}

impl DenseOracle {
    pub fn identity() -> Self {
        DenseOracle {
            kind: OracleKind::Identity,
        }
    }

    pub fn factor(word: Vec<u64>) -> Self {
        DenseOracle {
            kind: OracleKind::Factor(word),
        }
    }

    pub fn append_ones(count: u64) -> Self {
        Self::factor(vec![1; count as usize])
    }

    pub fn fixed(word: Vec<u64>) -> Self {
        DenseOracle {
            kind: OracleKind::Fixed(word),
        }
    }

    /// Extension rule: a word extending `s` whose cylinder lies inside the
    /// dense set.  Idempotent on words the predicate already accepts, except
    /// for the deliberately lawless fixed oracle.
    pub fn extend(&self, s: &[u64]) -> Vec<u64> {
        match &self.kind {
            OracleKind::Identity => s.to_vec(),
            OracleKind::Factor(w) => {
                if has_factor(s, w) {
                    s.to_vec()
                } else {
                    let mut out = s.to_vec();
                    out.extend_from_slice(w);
                    out
                }
            }
            OracleKind::Fixed(w) => w.clone(),
        }
    }

    /// Predicate form: every stream through `t` lies in the dense set.
    pub fn inside(&self, t: &[u64]) -> bool {
        match &self.kind {
            OracleKind::Identity => true,
            OracleKind::Factor(w) => has_factor(t, w),
            OracleKind::Fixed(w) => t.len() >= w.len() && t[..w.len()] == w[..],
        }
    }

    // Predicate lifted to a branch template; wildcard slots may take any
    // value, so only fully pinned occurrences count.  Sound: true means every
    // branch is inside.
    fn inside_template(&self, template: &[Option<u64>]) -> bool {
        let pinned_run = |at: usize, w: &[u64]| {
            at + w.len() <= template.len()
                && template[at..at + w.len()]
                    .iter()
                    .zip(w)
                    .all(|(slot, &v)| *slot == Some(v))
        };
        match &self.kind {
            OracleKind::Identity => true,
            OracleKind::Factor(w) => {
                w.is_empty() || (0..template.len()).any(|at| pinned_run(at, w))
            }
            OracleKind::Fixed(w) => pinned_run(0, w),
        }
    }

    // The word to thread through all branches when the template check fails;
    // None means a shared suffix cannot be produced blindly.
    fn landing_word(&self) -> Option<Vec<u64>> {
        match &self.kind {
            OracleKind::Identity => Some(vec![]),
            OracleKind::Factor(w) => Some(w.clone()),
            OracleKind::Fixed(_) => None,
        }
    }
}

/// One layer of a staged tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StageSegment {
    /// A word shared by every branch.
    Word(Vec<u64>),
    /// A full cube: this many levels of unrestricted branching.
    Cube(u64),
}

/// A tree whose branches all read the same fixed words between full cubes.
/// Terminal count is alphabet^cells, so the segment list is the only
/// representation that survives later rounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagedTree {
    k: u64,
    segments: Vec<StageSegment>,
}

impl StagedTree {
    pub fn new(k: u64) -> Self {
        StagedTree {
            k,
            segments: vec![],
        }
    }

    fn push_word(&mut self, word: Vec<u64>) {
        if word.is_empty() {
            return;
        }
        if let Some(StageSegment::Word(w)) = self.segments.last_mut() {
            w.extend(word);
        } else {
            self.segments.push(StageSegment::Word(word));
        }
    }

    fn push_cube(&mut self, height: u64) {
        if height == 0 {
            return;
        }
        if let Some(StageSegment::Cube(h)) = self.segments.last_mut() {
            *h += height;
        } else {
            self.segments.push(StageSegment::Cube(height));
        }
    }

    pub fn alphabet_size(&self) -> u64 {
        self.k
    }

    pub fn segments(&self) -> &[StageSegment] {
        &self.segments
    }

    /// Terminal length; every branch has this length.
    pub fn ht(&self) -> u64 {
        self.segments
            .iter()
            .map(|s| match s {
                StageSegment::Word(w) => w.len() as u64,
                StageSegment::Cube(h) => *h,
            })
            .sum()
    }

    /// Number of fully splitting levels; cube cells, one per wildcard.
    pub fn cells(&self) -> u64 {
        self.segments
            .iter()
            .map(|s| match s {
                StageSegment::Word(_) => 0,
                StageSegment::Cube(h) => *h,
            })
            .sum()
    }

    /// Splitting levels: a node of length p splits exactly when position p is
    /// inside a cube, and the level recorded for it is p + 1.
    pub fn lev(&self) -> BTreeSet<u64> {
        let mut out = BTreeSet::new();
        let mut pos = 0u64;
        for s in &self.segments {
            match s {
                StageSegment::Word(w) => pos += w.len() as u64,
                StageSegment::Cube(h) => {
                    for p in pos..pos + h {
                        out.insert(p + 1);
                    }
                    pos += h;
                }
            }
        }
        out
    }

    /// Splitting-levels-to-height ratio, exactly.
    pub fn ratio(&self) -> Q {
        let ht = self.ht();
        if ht == 0 {
            q(0, 1)
        } else {
            q(self.cells(), ht)
        }
    }

    pub fn terminal_count(&self) -> u128 {
        (self.k as u128)
            .checked_pow(self.cells() as u32)
            .unwrap_or(u128::MAX)
    }

    /// Branch template: fixed symbols, with `None` in cube positions.
    pub fn template(&self) -> Vec<Option<u64>> {
        let mut out = Vec::new();
        for s in &self.segments {
            match s {
                StageSegment::Word(w) => out.extend(w.iter().map(|&v| Some(v))),
                StageSegment::Cube(h) => out.extend(std::iter::repeat(None).take(*h as usize)),
            }
        }
        out
    }

    /// The branch selected by one digit per cube cell, in order.
    pub fn terminal(&self, digits: &[u64]) -> Vec<u64> {
        assert_eq!(digits.len() as u64, self.cells(), "one digit per cube cell");
        let mut next = digits.iter();
        self.template()
            .into_iter()
            .map(|slot| slot.unwrap_or_else(|| *next.next().expect("counted above")))
            .collect()
    }

    /// Sound membership certificate: true means every branch satisfies the
    /// oracle's predicate, by a fully pinned occurrence in the template.
    pub fn guaranteed_inside(&self, oracle: &DenseOracle) -> bool {
        oracle.inside_template(&self.template())
    }

    /// Explicit tree, when the terminal count permits.
    pub fn to_finite_tree(&self) -> Result<FiniteTree, TreeError> {
        let count = self.terminal_count();
        if count > (1u128 << 16) {
            return Err(TreeError::TooManyTerminals(count));
        }
        let cells = self.cells() as usize;
        let mut terminals = Vec::with_capacity(count as usize);
        for c in 0..count {
            let mut digits = vec![0u64; cells];
            let mut rest = c;
            for slot in digits.iter_mut().rev() {
                *slot = (rest % self.k as u128) as u64;
                rest /= self.k as u128;
            }
            terminals.push(self.terminal(&digits));
        }
        FiniteTree::new(self.k, terminals)
    }
}

/// Per-round audit: splitting statistics against the round's floor
/// `delta * (1 - 1/round)`, plus the membership certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditRow {
    pub round: u64,
    pub lev: u64,
    pub ht: u64,
    pub ratio: Q,
    pub bound: Q,
    pub inside_certified: bool,
}

/// The audit table in its line format: round, lev, ht, ratio, bound.
pub fn audit_csv(rows: &[AuditRow]) -> String {
    let mut out = String::from("round,lev,ht,ratio,bound\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.round, r.lev, r.ht, r.ratio, r.bound
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaRun {
    pub tree: StagedTree,
    pub audit: Vec<AuditRow>,
}

#[derive(Debug, Error)]
pub enum DeltaError {
    #[error("at least one round is needed")]
    NoRounds,
    #[error("{needed} rounds need as many oracles, only {have} supplied")]
    MissingOracle { needed: usize, have: usize },
    #[error("density floor {0} is above one")]
    DensityAboveOne(Q),
    #[error("oracle answered {output:?}, which does not extend {input:?}")]
    NotAnExtension { input: Vec<u64>, output: Vec<u64> },
}

fn audit_row(round: u64, delta: Q, tree: &StagedTree, oracle: &DenseOracle) -> AuditRow {
    let bound = if round == 0 {
        q(0, 1)
    } else {
        delta * (q(1, 1) - q(1, round))
    };
    AuditRow {
        round,
        lev: tree.cells(),
        ht: tree.ht(),
        ratio: tree.ratio(),
        bound,
        inside_certified: tree.guaranteed_inside(oracle),
    }
}

/// Runs `rounds` rounds of the refinement over binary words.
///
/// Round 0 lands the root word inside the first dense set and grafts a cube
/// as wide as that word (at least one level).  Each later round `n` threads
/// one shared word through all branches into the `n`-th dense set, then
/// grafts a cube of height `(n-1)` times the threaded length.  The audit
/// confirms, per round `n`, the splitting ratio floor `delta * (1 - 1/n)` and
/// the membership certificate for that round's dense set.
pub fn build_delta_tree(
    oracles: &[DenseOracle],
    delta: Q,
    rounds: usize,
) -> Result<DeltaRun, DeltaError> {
    if rounds == 0 {
        return Err(DeltaError::NoRounds);
    }
    if delta > q(1, 1) {
        return Err(DeltaError::DensityAboveOne(delta));
    }
    if oracles.len() < rounds {
        return Err(DeltaError::MissingOracle {
            needed: rounds,
            have: oracles.len(),
        });
    }
    let mut tree = StagedTree::new(2);
    let root = oracles[0].extend(&[]);
    let width = (root.len() as u64).max(1);
    tree.push_word(root);
    tree.push_cube(width);
    let mut audit = vec![audit_row(0, delta, &tree, &oracles[0])];
    for n in 1..rounds as u64 {
        let oracle = &oracles[n as usize];
        let thread = if tree.guaranteed_inside(oracle) {
            vec![]
        } else {
            match oracle.landing_word() {
                Some(w) => w,
                None => {
                    let least = tree.terminal(&vec![0; tree.cells() as usize]);
                    let answer = oracle.extend(&least);
                    if !answer.starts_with(&least) {
                        return Err(DeltaError::NotAnExtension {
                            input: least,
                            output: answer,
                        });
                    }
                    answer[least.len()..].to_vec()
                }
            }
        };
        tree.push_word(thread);
        tree.push_cube((n - 1) * tree.ht());
        audit.push(audit_row(n, delta, &tree, oracle));
    }
    Ok(DeltaRun { tree, audit })
}
