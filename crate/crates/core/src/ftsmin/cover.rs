use fixedbitset::FixedBitSet;

use super::{FtsMinError, SemiPartition};

pub const DEFAULT_COVER_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoverOptions {
    /// Take the greedy cover instead of searching for a minimum one.
    pub greedy: bool,
    /// Search nodes allowed in exact mode.
    pub budget: u64,
}

impl Default for CoverOptions {
    fn default() -> Self {
        CoverOptions {
            greedy: false,
            budget: DEFAULT_COVER_BUDGET,
        }
    }
}

/// A sub-collection of blocks covering all states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cover {
    pub partition: SemiPartition,
    /// Indices of the chosen blocks in the input, ascending.
    pub indices: Vec<usize>,
    /// False when the greedy fallback was used; the cover may then be
    /// larger than necessary.
    pub exact: bool,
}

/// Smallest set of blocks of `sp` covering every state. Among minimum
/// covers, the one with the lexicographically smallest index list wins.
pub fn min_cover(sp: &SemiPartition, opts: &CoverOptions) -> Result<Cover, FtsMinError> {
    let greedy = greedy_cover(sp);
    let (indices, exact) = if opts.greedy {
        (greedy, false)
    } else {
        (exact_cover(sp, greedy.len(), opts.budget)?, true)
    };
    let blocks = indices.iter().map(|&i| sp.block(i).clone()).collect();
    Ok(Cover {
        partition: SemiPartition::from_sets(sp.num_states(), blocks),
        indices,
        exact,
    })
}

fn greedy_cover(sp: &SemiPartition) -> Vec<usize> {
    let n = sp.num_states();
    let mut uncovered = FixedBitSet::with_capacity(n);
    uncovered.insert_range(..);
    let mut chosen = Vec::new();
    while !uncovered.is_clear() {
        let best = (0..sp.num_blocks())
            .max_by_key(|&i| {
                let gain = sp.block(i).intersection(&uncovered).count();
                (gain, std::cmp::Reverse(i))
            })
            .expect("nonempty semi-partition");
        uncovered.difference_with(sp.block(best));
        chosen.push(best);
    }
    chosen.sort_unstable();
    chosen
}

struct Search<'a> {
    sp: &'a SemiPartition,
    /// Largest block index containing each state.
    last_cover: Vec<usize>,
    max_block: usize,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    /// Extends `chosen` with blocks of index `>= start` to a cover of exactly
    /// `k` blocks, trying indices in ascending order.
    fn go(
        &mut self,
        k: usize,
        start: usize,
        chosen: &mut Vec<usize>,
        uncovered: &FixedBitSet,
    ) -> Result<bool, FtsMinError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(FtsMinError::CoverBudget {
                budget: self.budget,
            });
        }
        let left = uncovered.count_ones(..);
        if left == 0 {
            return Ok(true);
        }
        let room = k - chosen.len();
        if room == 0 || left > room * self.max_block {
            return Ok(false);
        }
        // every uncovered state still needs a block at or after `start`
        if uncovered.ones().any(|s| self.last_cover[s] < start) {
            return Ok(false);
        }
        for i in start..self.sp.num_blocks() {
            let block = self.sp.block(i);
            if block.is_disjoint(uncovered) {
                continue;
            }
            let mut rest = uncovered.clone();
            rest.difference_with(block);
            chosen.push(i);
            if self.go(k, i + 1, chosen, &rest)? {
                return Ok(true);
            }
            chosen.pop();
        }
        Ok(false)
    }
}

fn exact_cover(sp: &SemiPartition, upper: usize, budget: u64) -> Result<Vec<usize>, FtsMinError> {
    let n = sp.num_states();
    let mut last_cover = vec![0; n];
    for i in 0..sp.num_blocks() {
        for s in sp.block(i).ones() {
            last_cover[s] = i;
        }
    }
    let max_block = sp
        .blocks()
        .iter()
        .map(|b| b.count_ones(..))
        .max()
        .unwrap_or(0);
    let lower = n.div_ceil(max_block.max(1));
    let mut search = Search {
        sp,
        last_cover,
        max_block,
        nodes: 0,
        budget,
    };
    let mut all = FixedBitSet::with_capacity(n);
    all.insert_range(..);
    for k in lower..=upper {
        let mut chosen = Vec::new();
        if search.go(k, 0, &mut chosen, &all)? {
            return Ok(chosen);
        }
    }
    unreachable!("the greedy cover has {upper} blocks")
}
