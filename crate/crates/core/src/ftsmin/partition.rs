use fixedbitset::FixedBitSet;

use super::SemiPartition;
use crate::ltsmin::refine_lts;
use crate::transys::{Fts, TAU};

/// A disjoint partition of a preprocessed system in which no class holds
/// two states that some product reaches and tells apart. The quotient by
/// any such partition is branching bisimilar to the input in every
/// product, stable or not.
///
/// Each product's LTS is minimized on its own. States equivalent in some
/// product are then merged greedily, product by product in index order,
/// skipping any merge that would put two states of different classes of
/// a product into one class.
pub fn compatible_partition(fts: &Fts) -> SemiPartition {
    let n = fts.num_states();
    let np = fts.universe().len();
    let rho = fts.reachability();
    let mut view: Vec<Vec<Option<usize>>> = vec![vec![None; np]; n];
    for p in 0..np {
        let part = refine_lts(&fts.project_index(p));
        for (s, v) in view.iter_mut().enumerate() {
            if rho.get(s).contains(p) {
                v[p] = Some(part.block_of(s));
            }
        }
    }
    // view[r] of a root r merges the views of its class
    let own = view.clone();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut merge = |s: usize, t: usize, view: &mut Vec<Vec<Option<usize>>>| {
        let (a, b) = (find(&mut parent, s), find(&mut parent, t));
        if a == b || !agree(&view[a], &view[b]) {
            return;
        }
        let (keep, gone) = (a.min(b), a.max(b));
        parent[gone] = keep;
        let moved = std::mem::take(&mut view[gone]);
        for (x, y) in view[keep].iter_mut().zip(moved) {
            if x.is_none() {
                *x = y;
            }
        }
    };
    // τ-steps inert in every product that takes them go first: merging
    // along them is what removes τ-cycles
    for t in fts.transitions() {
        if t.action == TAU && t.guard.ones().all(|p| own[t.src][p] == own[t.dst][p]) {
            merge(t.src, t.dst, &mut view);
        }
    }
    for p in 0..np {
        let mut rep: Vec<Option<usize>> = vec![None; n];
        for s in 0..n {
            let Some(c) = own[s][p] else { continue };
            match rep[c] {
                Some(t) => merge(s, t, &mut view),
                None => rep[c] = Some(s),
            }
        }
    }
    let mut block_of_root = vec![usize::MAX; n];
    let mut blocks: Vec<FixedBitSet> = Vec::new();
    for s in 0..n {
        let r = find(&mut parent, s);
        if block_of_root[r] == usize::MAX {
            block_of_root[r] = blocks.len();
            blocks.push(FixedBitSet::with_capacity(n));
        }
        blocks[block_of_root[r]].insert(s);
    }
    SemiPartition::from_sets(n, blocks)
}

fn agree(a: &[Option<usize>], b: &[Option<usize>]) -> bool {
    a.iter().zip(b).all(|pair| match pair {
        (Some(x), Some(y)) => x == y,
        _ => true,
    })
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}
