use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;

use super::{
    compatible_partition, min_cover, refine_fts_bounded, Cover, CoverOptions, FeatureRelation,
    FtsMinError, SemiPartition, SplitOrder,
};
use crate::featurecore::ProductSet;
use crate::transys::{ActionId, Fts, FtsTransition, TAU};

/// Block graph of a cover of a preprocessed system. Block `i` becomes
/// state `b{i}`; the first block holding the initial state is initial.
///
/// A transition `s -α|ψ-> s'` of a member `s` of block `B` is routed to one
/// block holding `s'`: the one with the fewest states whose ρ meets `ψ`,
/// lowest index on ties. τ-steps that stay inside `B` are dropped.
pub fn quotient_fts(fts: &Fts, cover: &SemiPartition) -> Fts {
    let rho = fts.reachability();
    let containing: Vec<Vec<usize>> = (0..fts.num_states()).map(|s| cover.blocks_of(s)).collect();
    let mut theta: BTreeMap<(usize, ActionId, usize), ProductSet> = BTreeMap::new();
    for b in 0..cover.num_blocks() {
        for s in cover.block(b).ones() {
            for t in fts.outgoing(s) {
                if t.action == TAU && cover.block(b).contains(t.dst) {
                    continue;
                }
                let target = *containing[t.dst]
                    .iter()
                    .min_by_key(|&&c| {
                        let live = cover
                            .block(c)
                            .ones()
                            .filter(|&u| rho.get(u).intersects(&t.guard))
                            .count();
                        (live, c)
                    })
                    .expect("cover contains every state");
                theta
                    .entry((b, t.action, target))
                    .or_insert_with(|| fts.universe().empty())
                    .union_with(&t.guard);
            }
        }
    }
    let trans = theta
        .into_iter()
        .map(|((src, action, dst), guard)| FtsTransition {
            src,
            action,
            dst,
            guard,
        })
        .collect();
    let names = (0..cover.num_blocks()).map(|i| format!("b{i}")).collect();
    let init = containing[fts.initial()][0];
    Fts::new(
        fts.universe().clone(),
        fts.alphabet().clone(),
        names,
        trans,
        init,
    )
    .expect("quotient of a valid system")
}

/// Work allowed to semi-partition refinement by default; see
/// [`refine_fts_bounded`].
pub const DEFAULT_REFINE_BUDGET: u64 = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinimizeOptions {
    pub cover: CoverOptions,
    /// When refinement needs more work than this, the partition quotient
    /// is returned as is.
    pub refine_budget: u64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            cover: CoverOptions::default(),
            refine_budget: DEFAULT_REFINE_BUDGET,
        }
    }
}

/// How [`minimize_with`] got its semi-partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Refinement finished on the preprocessed input.
    Refined,
    /// Refinement ran out of budget; it finished on the quotient by
    /// [`compatible_partition`].
    PartitionThenRefined,
    /// Refinement ran out of budget twice; the partition quotient is the
    /// result.
    Partition,
}

/// Everything produced along the pipeline.
#[derive(Clone, Debug)]
pub struct Minimization {
    pub fts: Fts,
    /// Witness from input states to quotient states.
    pub relation: FeatureRelation,
    /// The preprocessed input.
    pub preprocessed: Fts,
    /// Input index of each preprocessed state.
    pub original_index: Vec<usize>,
    /// Disjoint classes of `preprocessed` merged before refinement;
    /// singletons under [`Route::Refined`].
    pub partition: SemiPartition,
    /// The system refinement ran on: `preprocessed` itself, or its
    /// quotient by `partition`, preprocessed again.
    pub reduced: Fts,
    /// Class of `partition` behind each state of `reduced`.
    pub reduced_class: Vec<usize>,
    /// Output of refinement on `reduced`, before covering. Singletons
    /// under [`Route::Partition`].
    pub refined: SemiPartition,
    pub route: Route,
    pub cover: Cover,
}

fn singletons(n: usize) -> SemiPartition {
    let blocks = (0..n)
        .map(|s| {
            let mut b = FixedBitSet::with_capacity(n);
            b.insert(s);
            b
        })
        .collect();
    SemiPartition::from_sets(n, blocks)
}

/// Preprocess, refine, cover, quotient. When refinement needs more than
/// `opts.refine_budget`, the input is first shrunk by
/// [`compatible_partition`] and refinement retried on the quotient.
pub fn minimize_with(fts: &Fts, opts: &MinimizeOptions) -> Result<Minimization, FtsMinError> {
    let (pre, original_index) = fts.preprocess();
    let budget = opts.refine_budget;
    let (partition, reduced, reduced_class, refined, route) =
        match refine_fts_bounded(&pre, SplitOrder::Scan, budget) {
            Some(r) => {
                let n = pre.num_states();
                (
                    singletons(n),
                    pre.clone(),
                    (0..n).collect(),
                    r,
                    Route::Refined,
                )
            }
            None => {
                log::debug!("refinement over budget; merging compatible states first");
                let partition = compatible_partition(&pre);
                let (reduced, reduced_class) = quotient_fts(&pre, &partition).preprocess();
                let (refined, route) = match refine_fts_bounded(&reduced, SplitOrder::Scan, budget)
                {
                    Some(r) => (r, Route::PartitionThenRefined),
                    None => (singletons(reduced.num_states()), Route::Partition),
                };
                (partition, reduced, reduced_class, refined, route)
            }
        };
    let cover = min_cover(&refined, &opts.cover)?;
    debug_assert!(
        super::find_splitter(&reduced, &cover.partition).is_none(),
        "cover lost stability"
    );
    let quotient = quotient_fts(&reduced, &cover.partition);
    let mut state_of_class = vec![usize::MAX; partition.num_blocks()];
    for (s, &c) in reduced_class.iter().enumerate() {
        state_of_class[c] = s;
    }
    let rho = pre.reachability();
    let mut triples = Vec::new();
    for c in 0..partition.num_blocks() {
        let r = state_of_class[c];
        assert!(r != usize::MAX, "every class survives preprocessing");
        for b in cover.partition.blocks_of(r) {
            for s in partition.block(c).ones() {
                triples.push((original_index[s], rho.get(s).clone(), b));
            }
        }
    }
    Ok(Minimization {
        fts: quotient,
        relation: FeatureRelation::new(triples),
        preprocessed: pre,
        original_index,
        partition,
        reduced,
        reduced_class,
        refined,
        route,
        cover,
    })
}

/// The minimized system and the witness relation to it.
pub fn minimize(fts: &Fts) -> Result<(Fts, FeatureRelation), FtsMinError> {
    let m = minimize_with(fts, &MinimizeOptions::default())?;
    Ok((m.fts, m.relation))
}
