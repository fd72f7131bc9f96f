use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Range;

use fixedbitset::FixedBitSet;

use super::SemiPartition;
use crate::featurecore::ProductSet;
use crate::transys::{ActionId, FeaturedLabel, Fts, TAU};

/// Evidence that block `block` is split by `splitter` on `label`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitCertificate {
    pub block: usize,
    pub splitter: usize,
    pub label: FeaturedLabel,
    pub non_neg: Vec<usize>,
    pub pos: Vec<usize>,
    pub neg: Vec<usize>,
}

/// Which split [`refine_fts_with`] performs when several are available.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SplitOrder {
    /// The one [`find_splitter`] reports.
    #[default]
    Scan,
    /// Splits with `pos = non-neg` first, which add no overlap; scan
    /// order within each group.
    CleanFirst,
}

/// Per-product reachability of a target within a block. For each state of
/// `B`, `loose` holds the products with an in-`B` enabled τ-path to an
/// `(α)`-step into `B'`, and `strict` those whose path ends in a real
/// `α`-transition.
struct Reach {
    loose: Vec<ProductSet>,
    strict: Vec<ProductSet>,
}

struct Sets {
    non_neg: Vec<usize>,
    pos: Vec<usize>,
    neg: Vec<usize>,
}

pub(super) struct Refiner<'a> {
    fts: &'a Fts,
    rho: &'a [ProductSet],
    labels: Vec<FeaturedLabel>,
    /// Labels of each action, as a range into `labels`.
    by_action: Vec<Range<usize>>,
    /// τ-transitions by target: `(source, guard)`.
    tau_pred: Vec<Vec<(usize, &'a ProductSet)>>,
}

impl<'a> Refiner<'a> {
    pub(super) fn new(fts: &'a Fts) -> Self {
        let mut tau_pred = vec![Vec::new(); fts.num_states()];
        for t in fts.transitions() {
            if t.action == TAU {
                tau_pred[t.dst].push((t.src, &t.guard));
            }
        }
        let labels = fts.featured_labels();
        let by_action = fts
            .alphabet()
            .ids()
            .map(|a| {
                let lo = labels.partition_point(|l| l.action < a);
                let hi = labels.partition_point(|l| l.action <= a);
                lo..hi
            })
            .collect();
        Refiner {
            fts,
            rho: fts.reachability().as_slice(),
            labels,
            by_action,
            tau_pred,
        }
    }

    fn fixpoint(&self, block: &FixedBitSet, mut w: Vec<ProductSet>) -> Vec<ProductSet> {
        let mut queued = FixedBitSet::with_capacity(self.fts.num_states());
        let mut work: Vec<usize> = block.ones().filter(|&s| !w[s].is_empty()).collect();
        for &s in &work {
            queued.insert(s);
        }
        while let Some(v) = work.pop() {
            queued.set(v, false);
            let from = w[v].clone();
            for &(u, g) in &self.tau_pred[v] {
                if block.contains(u) && w[u].union_with_intersection(&from, g) && !queued.put(u) {
                    work.push(u);
                }
            }
        }
        w
    }

    fn reach(&self, block: &FixedBitSet, target: &FixedBitSet, a: ActionId) -> Reach {
        let u = self.fts.universe();
        let mut direct = vec![u.empty(); self.fts.num_states()];
        for s in block.ones() {
            for t in self.fts.outgoing(s) {
                if t.action == a && target.contains(t.dst) {
                    direct[s].union_with(&t.guard);
                }
            }
        }
        let mut loose_init = direct.clone();
        if a == TAU {
            for s in block.ones().filter(|&s| target.contains(s)) {
                loose_init[s] = u.full();
            }
        }
        Reach {
            loose: self.fixpoint(block, loose_init),
            strict: self.fixpoint(block, direct),
        }
    }

    fn classify(&self, block: &FixedBitSet, psi: &ProductSet, r: &Reach) -> Sets {
        let (mut non_neg, mut pos, mut neg) = (Vec::new(), Vec::new(), Vec::new());
        for s in block.ones() {
            let rho = &self.rho[s];
            if rho.intersection_is_subset(psi, &r.loose[s]) {
                non_neg.push(s);
                if psi.is_subset(rho) && psi.is_subset(&r.strict[s]) {
                    pos.push(s);
                }
            } else {
                neg.push(s);
            }
        }
        Sets { non_neg, pos, neg }
    }

    /// Labels that can have a nonempty pos on `block`.
    fn live_label(&self, block: &FixedBitSet, label: &FeaturedLabel) -> bool {
        block.ones().any(|s| label.guard.is_subset(&self.rho[s]))
    }

    /// First splitter by block index, then featured label, then splitter
    /// block index.
    pub(super) fn find_splitter(&self, sp: &SemiPartition) -> Option<SplitCertificate> {
        for b in 0..sp.num_blocks() {
            let block = sp.block(b);
            if block.count_ones(..) < 2 {
                continue;
            }
            // splitters need a real α-step from B into B'
            let mut targets: BTreeSet<(ActionId, usize)> = BTreeSet::new();
            for s in block.ones() {
                for t in self.fts.outgoing(s) {
                    for b2 in sp.blocks_of(t.dst) {
                        if !(t.action == TAU && b2 == b) {
                            targets.insert((t.action, b2));
                        }
                    }
                }
            }
            let mut cache: HashMap<(ActionId, usize), Reach> = HashMap::new();
            for label in &self.labels {
                if !self.live_label(block, label) {
                    continue;
                }
                let range = (label.action, 0)..=(label.action, usize::MAX);
                for &(a, b2) in targets.range(range) {
                    let r = cache
                        .entry((a, b2))
                        .or_insert_with(|| self.reach(block, sp.block(b2), a));
                    let sets = self.classify(block, &label.guard, r);
                    if !sets.pos.is_empty() && !sets.neg.is_empty() {
                        return Some(SplitCertificate {
                            block: b,
                            splitter: b2,
                            label: label.clone(),
                            non_neg: sets.non_neg,
                            pos: sets.pos,
                            neg: sets.neg,
                        });
                    }
                }
            }
        }
        None
    }

    fn sets(&self, sp: &SemiPartition, b: usize, b2: usize, label: &FeaturedLabel) -> Sets {
        let r = self.reach(sp.block(b), sp.block(b2), label.action);
        self.classify(sp.block(b), &label.guard, &r)
    }
}

/// `non-neg_(α,ψ)(B, B')` on a preprocessed system.
pub fn non_neg(
    fts: &Fts,
    sp: &SemiPartition,
    b: usize,
    b2: usize,
    label: &FeaturedLabel,
) -> Vec<usize> {
    Refiner::new(fts).sets(sp, b, b2, label).non_neg
}

/// `pos_(α,ψ)(B, B')`, a subset of [`non_neg`].
pub fn pos(
    fts: &Fts,
    sp: &SemiPartition,
    b: usize,
    b2: usize,
    label: &FeaturedLabel,
) -> Vec<usize> {
    Refiner::new(fts).sets(sp, b, b2, label).pos
}

/// `B \ non-neg_(α,ψ)(B, B')`.
pub fn neg(
    fts: &Fts,
    sp: &SemiPartition,
    b: usize,
    b2: usize,
    label: &FeaturedLabel,
) -> Vec<usize> {
    Refiner::new(fts).sets(sp, b, b2, label).neg
}

pub fn find_splitter(fts: &Fts, sp: &SemiPartition) -> Option<SplitCertificate> {
    Refiner::new(fts).find_splitter(sp)
}

/// Refines `{S}` until no splitter is left. `fts` must be preprocessed.
pub fn refine_fts(fts: &Fts) -> SemiPartition {
    refine_fts_with(fts, SplitOrder::Scan)
}

/// Ordering key of a pending split: group, block id, label, splitter id.
/// Block ids grow with creation and blocks keep creation order, so id
/// order is index order.
type Key = (u8, usize, usize, usize);

/// [`refine_fts`] with a choice of split order.
pub fn refine_fts_with(fts: &Fts, order: SplitOrder) -> SemiPartition {
    refine_fts_bounded(fts, order, u64::MAX).expect("unbounded refinement finishes")
}

/// [`refine_fts_with`], giving up with `None` once more than `budget`
/// units of work are spent. A unit is one state visited while computing
/// reachability into a splitter or classifying a block.
///
/// Whether `B'` splits `B` depends only on the two sets, so every split
/// found stays valid while both blocks live; only pairs involving a new
/// block are examined after a split.
pub fn refine_fts_bounded(fts: &Fts, order: SplitOrder, budget: u64) -> Option<SemiPartition> {
    let n = fts.num_states();
    let refiner = Refiner::new(fts);
    let mut e = Engine {
        refiner: &refiner,
        order,
        blocks: Vec::new(),
        ids: Vec::new(),
        next: 0,
        pending: BTreeMap::new(),
        work: 0,
        budget,
    };
    let mut all = FixedBitSet::with_capacity(n);
    all.insert_range(..);
    e.add(all);
    let mut rounds = 0usize;
    while let Some((&key, _)) = e.pending.first_key_value() {
        if e.work > e.budget {
            log::debug!(
                "refinement gave up after {rounds} splits, {} blocks",
                e.blocks.len()
            );
            return None;
        }
        let sets = e.pending.remove(&key).expect("present");
        rounds += 1;
        assert!(rounds <= n * n, "refinement exceeded |S|^2 rounds");
        let (_, id, label, id2) = key;
        let b = e.position(id);
        log::trace!(
            "split block {} by block {} on {}: pos {:?} neg {:?}",
            b,
            e.position(id2),
            fts.alphabet().name(refiner.labels[label].action),
            sets.pos,
            sets.neg
        );
        let old = e.remove(b);
        let b1 = to_set(n, &sets.non_neg);
        let mut b2 = old.clone();
        for &s in &sets.pos {
            b2.set(s, false);
        }
        for new in [b1, b2] {
            if !e.blocks.iter().any(|c| new.is_subset(c)) {
                assert!(
                    !e.blocks.iter().any(|c| c.is_subset(&new)),
                    "split broke the antichain"
                );
                e.add(new);
            }
        }
        assert!(
            old.ones().all(|s| e.blocks.iter().any(|c| c.contains(s))),
            "split broke the cover"
        );
    }
    if e.work > e.budget {
        return None;
    }
    log::debug!(
        "refinement: {rounds} splits, {} blocks, {} work",
        e.blocks.len(),
        e.work
    );
    Some(SemiPartition::from_sets(n, e.blocks))
}

struct Engine<'r, 'a> {
    refiner: &'r Refiner<'a>,
    order: SplitOrder,
    blocks: Vec<FixedBitSet>,
    /// Creation id of each block, ascending.
    ids: Vec<usize>,
    next: usize,
    pending: BTreeMap<Key, Sets>,
    work: u64,
    budget: u64,
}

impl Engine<'_, '_> {
    fn position(&self, id: usize) -> usize {
        self.ids.binary_search(&id).expect("live block")
    }

    fn remove(&mut self, b: usize) -> FixedBitSet {
        let id = self.ids.remove(b);
        self.pending.retain(|&(_, x, _, y), _| x != id && y != id);
        self.blocks.remove(b)
    }

    fn add(&mut self, block: FixedBitSet) {
        self.blocks.push(block);
        self.ids.push(self.next);
        self.next += 1;
        let p = self.blocks.len() - 1;
        for q in 0..=p {
            if self.work > self.budget {
                return;
            }
            self.scan_pair(p, q);
            if q != p {
                self.scan_pair(q, p);
            }
        }
    }

    /// Records every label on which block `b2` splits block `b`.
    fn scan_pair(&mut self, b: usize, b2: usize) {
        let r = self.refiner;
        let (block, target) = (&self.blocks[b], &self.blocks[b2]);
        if block.count_ones(..) < 2 {
            return;
        }
        let mut actions = BTreeSet::new();
        for s in block.ones() {
            for t in r.fts.outgoing(s) {
                if target.contains(t.dst) && !(t.action == TAU && b == b2) {
                    actions.insert(t.action);
                }
            }
        }
        for a in actions {
            let range = r.by_action[a.index()].clone();
            let live: Vec<usize> = range
                .filter(|&l| r.live_label(block, &r.labels[l]))
                .collect();
            if live.is_empty() {
                continue;
            }
            let size = block.count_ones(..) as u64;
            self.work = self.work.saturating_add(size * (live.len() as u64 + 1));
            let reach = r.reach(block, target, a);
            for l in live {
                let sets = r.classify(block, &r.labels[l].guard, &reach);
                if sets.pos.is_empty() || sets.neg.is_empty() {
                    continue;
                }
                let group = match self.order {
                    SplitOrder::Scan => 0,
                    SplitOrder::CleanFirst => u8::from(sets.pos.len() != sets.non_neg.len()),
                };
                self.pending
                    .insert((group, self.ids[b], l, self.ids[b2]), sets);
            }
        }
    }
}

fn to_set(n: usize, states: &[usize]) -> FixedBitSet {
    let mut set = FixedBitSet::with_capacity(n);
    for &s in states {
        set.insert(s);
    }
    set
}
