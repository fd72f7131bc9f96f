//! Branching bisimulation on LTSs: τ-closure, partition refinement,
//! quotienting, and a naive fixpoint oracle.

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::transys::{ActionId, Lts, TAU};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LtsMinError {
    #[error("partition is not stable: block {block} is split by block {splitter} on `{action}`")]
    NotStable {
        block: usize,
        action: String,
        splitter: usize,
    },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("{states} states exceed the oracle limit of {limit}")]
    TooLarge { states: usize, limit: usize },
}

/// Disjoint blocks covering all states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Partition {
    /// The single block `{0, .., n-1}`.
    pub fn trivial(n: usize) -> Self {
        Partition {
            blocks: vec![(0..n).collect()],
            block_of: vec![0; n],
        }
    }

    /// Validates that `blocks` are nonempty, disjoint and cover `0..n`.
    pub fn from_blocks(n: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self, LtsMinError> {
        let mut block_of = vec![usize::MAX; n];
        for (i, b) in blocks.iter_mut().enumerate() {
            if b.is_empty() {
                return Err(LtsMinError::InvalidPartition(format!("block {i} is empty")));
            }
            b.sort_unstable();
            for &s in b.iter() {
                if s >= n {
                    return Err(LtsMinError::InvalidPartition(format!(
                        "state {s} out of range"
                    )));
                }
                if block_of[s] != usize::MAX {
                    return Err(LtsMinError::InvalidPartition(format!(
                        "state {s} in two blocks"
                    )));
                }
                block_of[s] = i;
            }
        }
        if let Some(s) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(LtsMinError::InvalidPartition(format!(
                "state {s} not covered"
            )));
        }
        Ok(Partition { blocks, block_of })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, b: usize) -> &[usize] {
        &self.blocks[b]
    }

    pub fn block_of(&self, s: usize) -> usize {
        self.block_of[s]
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Blocks as a sorted set of sorted blocks, independent of block order.
    pub fn classes(&self) -> BTreeSet<Vec<usize>> {
        self.blocks.iter().cloned().collect()
    }
}

/// States reachable from `s` by zero or more τ-steps.
pub fn tau_reach(lts: &Lts, s: usize) -> FixedBitSet {
    let mut seen = FixedBitSet::with_capacity(lts.num_states());
    seen.insert(s);
    let mut stack = vec![s];
    while let Some(u) = stack.pop() {
        for &(_, a, t) in lts.outgoing(u) {
            if a == TAU && !seen.put(t) {
                stack.push(t);
            }
        }
    }
    seen
}

/// Per-LTS scratch data for the refinement loop.
struct Refiner<'a> {
    lts: &'a Lts,
    tau_pred: Vec<Vec<usize>>,
    mark: FixedBitSet,
}

impl<'a> Refiner<'a> {
    fn new(lts: &'a Lts) -> Self {
        let mut tau_pred = vec![Vec::new(); lts.num_states()];
        for &(s, a, t) in lts.transitions() {
            if a == TAU {
                tau_pred[t].push(s);
            }
        }
        Refiner {
            lts,
            tau_pred,
            mark: FixedBitSet::with_capacity(lts.num_states()),
        }
    }

    /// States of block `b` with a τ-path inside `b` to a state having an
    /// `a`-step into block `b2`. Left in `self.mark`; returns the count.
    fn pos(&mut self, part: &Partition, b: usize, b2: usize, a: ActionId) -> usize {
        self.mark.clear();
        let mut stack = Vec::new();
        for &s in part.block(b) {
            let hit = self
                .lts
                .outgoing(s)
                .iter()
                .any(|&(_, x, t)| x == a && part.block_of(t) == b2);
            if hit {
                self.mark.insert(s);
                stack.push(s);
            }
        }
        let mut count = stack.len();
        while let Some(u) = stack.pop() {
            for &p in &self.tau_pred[u] {
                if part.block_of(p) == b && !self.mark.put(p) {
                    stack.push(p);
                    count += 1;
                }
            }
        }
        count
    }

    /// First `(B, α, B')` in block, action, candidate order with nonempty
    /// pos and neg. The pos set is left in `self.mark`.
    fn find_splitter(&mut self, part: &Partition) -> Option<(usize, ActionId, usize)> {
        for b in 0..part.num_blocks() {
            let size = part.block(b).len();
            if size < 2 {
                continue;
            }
            let candidates: BTreeSet<(ActionId, usize)> = part
                .block(b)
                .iter()
                .flat_map(|&s| self.lts.outgoing(s).iter())
                .map(|&(_, a, t)| (a, part.block_of(t)))
                .filter(|&(a, b2)| !(a == TAU && b2 == b))
                .collect();
            for (a, b2) in candidates {
                let k = self.pos(part, b, b2, a);
                if k > 0 && k < size {
                    return Some((b, a, b2));
                }
            }
        }
        None
    }
}

/// `pos_α(B, B')` and `neg_α(B, B')` for blocks `b`, `b2` of `part`.
pub fn pos_neg(
    lts: &Lts,
    part: &Partition,
    b: usize,
    b2: usize,
    a: ActionId,
) -> (Vec<usize>, Vec<usize>) {
    let mut r = Refiner::new(lts);
    r.pos(part, b, b2, a);
    part.block(b).iter().partition(|&&s| r.mark.contains(s))
}

/// The coarsest branching bisimulation partition, by repeatedly splitting
/// a block into its pos and neg parts. pos keeps the block's index and neg
/// is appended.
pub fn refine_lts(lts: &Lts) -> Partition {
    let mut part = Partition::trivial(lts.num_states());
    let mut r = Refiner::new(lts);
    while let Some((b, a, b2)) = r.find_splitter(&part) {
        log::trace!(
            "split block {b} by block {b2} on {}",
            lts.alphabet().name(a)
        );
        let (pos, neg): (Vec<usize>, Vec<usize>) =
            part.blocks[b].iter().partition(|&&s| r.mark.contains(s));
        let nb = part.blocks.len();
        for &s in &neg {
            part.block_of[s] = nb;
        }
        part.blocks[b] = pos;
        part.blocks.push(neg);
    }
    part
}

/// A witness that `part` is not stable for `lts`, if any.
pub fn find_lts_splitter(lts: &Lts, part: &Partition) -> Option<(usize, ActionId, usize)> {
    Refiner::new(lts).find_splitter(part)
}

/// Block graph of a stable partition without τ self-loops. Block `i`
/// becomes state `i`, named `b{i}`.
pub fn quotient_lts(lts: &Lts, part: &Partition) -> Result<Lts, LtsMinError> {
    if part.block_of.len() != lts.num_states() {
        return Err(LtsMinError::InvalidPartition(format!(
            "partition over {} states, system has {}",
            part.block_of.len(),
            lts.num_states()
        )));
    }
    if let Some((block, a, splitter)) = find_lts_splitter(lts, part) {
        return Err(LtsMinError::NotStable {
            block,
            action: lts.alphabet().name(a).to_string(),
            splitter,
        });
    }
    let trans = lts
        .transitions()
        .iter()
        .map(|&(s, a, t)| (part.block_of(s), a, part.block_of(t)))
        .filter(|&(b, a, b2)| !(a == TAU && b == b2))
        .collect();
    let names = (0..part.num_blocks()).map(|i| format!("b{i}")).collect();
    Ok(Lts::new(
        lts.alphabet().clone(),
        names,
        trans,
        part.block_of(lts.initial()),
    )
    .expect("quotient of a valid system"))
}

/// Refinement followed by quotienting.
pub fn minimize_lts(lts: &Lts) -> Lts {
    let part = refine_lts(lts);
    quotient_lts(lts, &part).expect("refinement output is stable")
}

/// Whether the initial states of `l1` and `l2` are branching bisimilar.
pub fn branching_bisimilar(l1: &Lts, l2: &Lts) -> bool {
    let union = l1.disjoint_union(l2);
    let part = refine_lts(&union);
    part.block_of(l1.initial()) == part.block_of(l1.num_states() + l2.initial())
}

/// Largest state count accepted by [`naive_bbisim`].
pub const NAIVE_LIMIT: usize = 200;

/// The largest branching bisimulation relation, as one bitset row per
/// state, computed by deleting pairs that violate the transfer condition
/// until nothing changes.
pub fn naive_bbisim(lts: &Lts) -> Result<Vec<FixedBitSet>, LtsMinError> {
    let n = lts.num_states();
    if n > NAIVE_LIMIT {
        return Err(LtsMinError::TooLarge {
            states: n,
            limit: NAIVE_LIMIT,
        });
    }
    let closure: Vec<FixedBitSet> = (0..n).map(|s| tau_reach(lts, s)).collect();
    let mut rel: Vec<FixedBitSet> = (0..n)
        .map(|_| {
            let mut row = FixedBitSet::with_capacity(n);
            row.insert_range(..);
            row
        })
        .collect();
    let transfers = |rel: &[FixedBitSet], s: usize, t: usize| -> bool {
        lts.outgoing(s).iter().all(|&(_, a, s2)| {
            closure[t].ones().any(|th| {
                rel[s].contains(th)
                    && ((a == TAU && rel[s2].contains(th))
                        || lts
                            .outgoing(th)
                            .iter()
                            .any(|&(_, b, t2)| b == a && rel[s2].contains(t2)))
            })
        })
    };
    loop {
        let mut changed = false;
        for s in 0..n {
            for t in 0..n {
                if rel[s].contains(t) && !(transfers(&rel, s, t) && transfers(&rel, t, s)) {
                    rel[s].set(t, false);
                    rel[t].set(s, false);
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(rel);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transys::LtsBuilder;

    fn lts(edges: &[(&str, &str, &str)], init: &str) -> Lts {
        let mut b = LtsBuilder::new();
        b.state(init).unwrap();
        for (s, a, t) in edges {
            b.transition(s, a, t).unwrap();
        }
        b.initial(init).unwrap();
        b.build().unwrap()
    }

    fn fig1_left() -> (Lts, Lts) {
        (
            lts(
                &[("s0", "tau", "s1"), ("s0", "b", "s2"), ("s1", "a", "s3")],
                "s0",
            ),
            lts(
                &[
                    ("t0", "tau", "t1"),
                    ("t0", "a", "t2"),
                    ("t0", "b", "t3"),
                    ("t1", "a", "t4"),
                ],
                "t0",
            ),
        )
    }

    fn fig1_right() -> (Lts, Lts) {
        (
            lts(
                &[
                    ("u0", "tau", "u1"),
                    ("u0", "a", "u2"),
                    ("u0", "b", "u3"),
                    ("u1", "a", "u4"),
                    ("u1", "b", "u5"),
                ],
                "u0",
            ),
            lts(&[("v0", "a", "v1"), ("v0", "b", "v2")], "v0"),
        )
    }

    #[test]
    fn tau_closure() {
        let (s, _) = fig1_left();
        let r = tau_reach(&s, 0);
        assert_eq!(r.ones().collect::<Vec<_>>(), vec![0, 1]);
        let no_tau = lts(&[("x", "a", "y")], "x");
        assert_eq!(tau_reach(&no_tau, 0).count_ones(..), 1);
        let cyc = lts(&[("x", "tau", "y"), ("y", "tau", "x")], "x");
        assert_eq!(tau_reach(&cyc, 1).count_ones(..), 2);
    }

    #[test]
    fn fig1_verdicts() {
        let (s, t) = fig1_left();
        assert!(!branching_bisimilar(&s, &t));
        let (u, v) = fig1_right();
        assert!(branching_bisimilar(&u, &v));
        let union = u.disjoint_union(&v);
        let part = refine_lts(&union);
        let (u0, u1, v0) = (0, 1, u.num_states());
        assert_eq!(part.block_of(u0), part.block_of(u1));
        assert_eq!(part.block_of(u0), part.block_of(v0));
    }

    #[test]
    fn pos_neg_on_fig1_left_partition() {
        let (s, t) = fig1_left();
        let union = s.disjoint_union(&t);
        let idx = |n: &str| union.state_index(n).unwrap();
        // {s0,s1,t0}, {s2,s3,t2,t4}, {t1}, {t3}
        let blocks = vec![
            vec![idx("l.s0"), idx("l.s1"), idx("r.t0")],
            vec![idx("l.s2"), idx("l.s3"), idx("r.t2"), idx("r.t4")],
            vec![idx("r.t1")],
            vec![idx("r.t3")],
        ];
        let part = Partition::from_blocks(union.num_states(), blocks).unwrap();
        let b = union.alphabet().id("b").unwrap();
        let (pos, neg) = pos_neg(&union, &part, 0, 3, b);
        assert!(pos.contains(&idx("r.t0")));
        assert!(neg.contains(&idx("l.s1")));
        let a = union.alphabet().id("a").unwrap();
        let (pos, neg) = pos_neg(&union, &part, 2, 0, a);
        assert!(pos.is_empty());
        assert_eq!(neg, vec![idx("r.t1")]);
    }

    #[test]
    fn quotient_collapses_inert_tau() {
        let s = lts(
            &[("s1", "a", "s2"), ("s2", "tau", "s3"), ("s3", "a", "s4")],
            "s1",
        );
        let q = minimize_lts(&s);
        let chain = lts(&[("x", "a", "y"), ("y", "a", "z")], "x");
        assert!(crate::transys::lts_isomorphic(&q, &chain));
    }

    #[test]
    fn quotient_omits_tau_self_loops() {
        let s = lts(&[("x", "tau", "x")], "x");
        let q = minimize_lts(&s);
        assert_eq!(q.num_states(), 1);
        assert_eq!(q.num_transitions(), 0);
    }

    #[test]
    fn quotient_rejects_unstable_partition() {
        let (s, _) = fig1_left();
        let err = quotient_lts(&s, &Partition::trivial(s.num_states())).unwrap_err();
        assert!(matches!(err, LtsMinError::NotStable { .. }));
    }

    #[test]
    fn single_state_is_one_block() {
        let s = lts(&[], "x");
        assert_eq!(refine_lts(&s).num_blocks(), 1);
        assert!(branching_bisimilar(&s, &s));
    }

    #[test]
    fn naive_agrees_on_fig1() {
        for (a, b) in [fig1_left(), fig1_right()] {
            let u = a.disjoint_union(&b);
            let rel = naive_bbisim(&u).unwrap();
            let part = refine_lts(&u);
            for s in 0..u.num_states() {
                assert!(rel[s].contains(s));
                for t in 0..u.num_states() {
                    assert_eq!(rel[s].contains(t), part.block_of(s) == part.block_of(t));
                }
            }
        }
    }

    fn arb_lts() -> impl proptest::strategy::Strategy<Value = Lts> {
        use proptest::prelude::*;
        (1usize..=12).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0u32..3, 0..n), 0..=3 * n).prop_map(move |edges| {
                let alphabet =
                    std::sync::Arc::new(crate::transys::Alphabet::new(["a", "b"]).unwrap());
                let trans = edges
                    .into_iter()
                    .map(|(s, a, t)| (s, ActionId(a), t))
                    .collect();
                Lts::with_numbered_states(alphabet, n, trans, 0).unwrap()
            })
        })
    }

    proptest::proptest! {
        #[test]
        fn refinement_matches_naive(l in arb_lts()) {
            let rel = naive_bbisim(&l).unwrap();
            let part = refine_lts(&l);
            for s in 0..l.num_states() {
                for t in 0..l.num_states() {
                    proptest::prop_assert_eq!(rel[s].contains(t), part.block_of(s) == part.block_of(t));
                }
            }
        }

        #[test]
        fn quotient_is_bisimilar_and_minimal(l in arb_lts()) {
            let q = minimize_lts(&l);
            proptest::prop_assert!(branching_bisimilar(&l, &q));
            proptest::prop_assert_eq!(refine_lts(&q).num_blocks(), q.num_states());
        }
    }
}
