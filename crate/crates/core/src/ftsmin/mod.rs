//! Coherent branching feature bisimulation: relation checking,
//! partition pre-reduction, semi-partition refinement, minimum cover,
//! and quotienting.

mod check;
mod cover;
mod partition;
mod quotient;
mod refine;

pub use check::{
    bisimilar_fts_oracle, check_feature_bisimulation, fts_tau_step, Counterexample, FailureKind,
    FeatureRelation, Side, StateRef, Verdict,
};
pub use cover::{min_cover, Cover, CoverOptions, DEFAULT_COVER_BUDGET};
pub use partition::compatible_partition;
pub use quotient::{
    minimize, minimize_with, quotient_fts, Minimization, MinimizeOptions, Route,
    DEFAULT_REFINE_BUDGET,
};
pub use refine::{
    find_splitter, neg, non_neg, pos, refine_fts, refine_fts_bounded, refine_fts_with,
    SplitCertificate, SplitOrder,
};

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FtsMinError {
    #[error(
        "exact set cover gave up after {budget} search nodes; rerun with --greedy \
         or a larger --budget"
    )]
    CoverBudget { budget: u64 },
    #[error("systems are over different product universes")]
    UniverseMismatch,
    #[error("{side} state {index} out of range")]
    StateOutOfRange { side: Side, index: usize },
    #[error("invalid semi-partition: {0}")]
    InvalidSemiPartition(String),
}

/// Nonempty, possibly overlapping blocks that cover the state set, none
/// contained in another.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemiPartition {
    n: usize,
    blocks: Vec<FixedBitSet>,
}

impl SemiPartition {
    /// `{S}` for `n` states.
    pub fn trivial(n: usize) -> Self {
        let mut all = FixedBitSet::with_capacity(n);
        all.insert_range(..);
        SemiPartition {
            n,
            blocks: vec![all],
        }
    }

    /// Checks cover and antichain.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self, FtsMinError> {
        let mut sets = Vec::with_capacity(blocks.len());
        for (i, b) in blocks.iter().enumerate() {
            let mut set = FixedBitSet::with_capacity(n);
            for &s in b {
                if s >= n {
                    return Err(FtsMinError::InvalidSemiPartition(format!(
                        "state {s} out of range in block {i}"
                    )));
                }
                set.insert(s);
            }
            if set.is_clear() {
                return Err(FtsMinError::InvalidSemiPartition(format!(
                    "block {i} is empty"
                )));
            }
            sets.push(set);
        }
        let sp = SemiPartition { n, blocks: sets };
        if !sp.is_cover() {
            return Err(FtsMinError::InvalidSemiPartition(
                "blocks do not cover all states".into(),
            ));
        }
        if !sp.is_antichain() {
            return Err(FtsMinError::InvalidSemiPartition(
                "a block is contained in another".into(),
            ));
        }
        Ok(sp)
    }

    pub(crate) fn from_sets(n: usize, blocks: Vec<FixedBitSet>) -> Self {
        SemiPartition { n, blocks }
    }

    pub fn num_states(&self) -> usize {
        self.n
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, i: usize) -> &FixedBitSet {
        &self.blocks[i]
    }

    pub fn blocks(&self) -> &[FixedBitSet] {
        &self.blocks
    }

    pub fn members(&self, i: usize) -> Vec<usize> {
        self.blocks[i].ones().collect()
    }

    /// Indices of the blocks containing `s`.
    pub fn blocks_of(&self, s: usize) -> Vec<usize> {
        (0..self.blocks.len())
            .filter(|&i| self.blocks[i].contains(s))
            .collect()
    }

    /// `s ∼ t`: some block holds both.
    pub fn related(&self, s: usize, t: usize) -> bool {
        self.blocks.iter().any(|b| b.contains(s) && b.contains(t))
    }

    pub fn is_cover(&self) -> bool {
        let mut all = FixedBitSet::with_capacity(self.n);
        for b in &self.blocks {
            all.union_with(b);
        }
        all.count_ones(..) == self.n
    }

    pub fn is_antichain(&self) -> bool {
        self.blocks.iter().enumerate().all(|(i, bi)| {
            self.blocks
                .iter()
                .enumerate()
                .all(|(j, bj)| i == j || !bj.is_subset(bi))
        })
    }

    /// Blocks as sorted member lists, independent of block order.
    pub fn classes(&self) -> BTreeSet<Vec<usize>> {
        (0..self.blocks.len()).map(|i| self.members(i)).collect()
    }

    /// Every block lies inside some block of `coarser`.
    pub fn refines(&self, coarser: &SemiPartition) -> bool {
        self.blocks
            .iter()
            .all(|b| coarser.blocks.iter().any(|c| b.is_subset(c)))
    }
}

#[cfg(test)]
mod tests;
