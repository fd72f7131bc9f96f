use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::featurecore::{FeatureExpr, Product, Universe};
use crate::gen::{random_fts, rng, FtsParams};
use crate::ltsmin::minimize_lts;
use crate::modelio::{parse_fts, parse_guard};
use crate::transys::{fts_isomorphic, Fts, FtsBuilder};

const FIG3_S: &str = "features f
states s1 s2 s3 s4
init s1
trans s1 -> s2 : a
trans s2 -> s3 : tau
trans s3 -> s4 : a
";

const FIG3_T: &str = "features f
states t1 t2 t3
init t1
trans t1 -> t2 : a
trans t2 -> t3 : a
";

const FIG3_U: &str = "features f
states u1 u2 u3
init u1
trans u1 -> u3 : a [f]
trans u1 -> u2 : a [!f]
trans u2 -> u3 : a [!f]
trans u3 -> u2 : a [f]
";

const FIG4_S: &str = "features f
states s1 s2 s3 s4
init s1
trans s1 -> s2 : tau
trans s2 -> s3 : a [f]
trans s1 -> s4 : a [!f]
";

const FIG4_U: &str = "features f
states u1 u2 u3
init u1
trans u1 -> u2 : tau
trans u1 -> u3 : a [!f]
trans u2 -> u3 : a [f]
";

fn fts(text: &str) -> Fts {
    parse_fts(text).unwrap()
}

fn fig2_universe(extra_bad: bool) -> Arc<Universe> {
    let features: Vec<String> = ["a1", "a2", "b1", "b2"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let constraint = parse_guard("a1 & a2 -> (b1 <-> b2)").unwrap();
    let mut products = Vec::new();
    for m in 0u32..16 {
        let p = Product::new(
            features
                .iter()
                .enumerate()
                .filter(|(i, _)| m >> i & 1 == 1)
                .map(|(_, f)| f.as_str()),
        );
        let ok = constraint.eval_with(&|f: &str| p.contains(f));
        let bad = p == Product::new(["a1", "a2", "b1"]);
        if ok || (extra_bad && bad) {
            products.push(p);
        }
    }
    Universe::new(features, products).unwrap()
}

/// Fig. 2 pair over `u`, with the relation R from its caption.
fn fig2(u: Arc<Universe>) -> (Fts, Fts, FeatureRelation) {
    let g = |e: &str| u.denote(&parse_guard(e).unwrap()).unwrap();
    let mut l = FtsBuilder::new(u.clone());
    l.transition("s0", "a", "s1", g("a1")).unwrap();
    l.transition("s0", "a", "s2", g("a2")).unwrap();
    l.transition("s1", "b", "s3", g("b1")).unwrap();
    l.transition("s2", "b", "s3", g("b2")).unwrap();
    l.initial("s0").unwrap();
    let mut r = FtsBuilder::new(u.clone());
    r.transition("t0", "a", "t1", g("a1 | a2")).unwrap();
    r.transition("t1", "b", "t2", g("a1 & b1 | a2 & b2"))
        .unwrap();
    r.initial("t0").unwrap();
    let (l, r) = (l.build().unwrap(), r.build().unwrap());
    let s = |n: &str| l.state_index(n).unwrap();
    let t = |n: &str| r.state_index(n).unwrap();
    let rel = FeatureRelation::new([
        (s("s0"), u.full(), t("t0")),
        (s("s1"), g("a1"), t("t1")),
        (s("s2"), g("a2"), t("t1")),
        (s("s3"), u.full(), t("t2")),
    ]);
    (l, r, rel)
}

#[test]
fn tau_step_respects_guards() {
    let f =
        fts("features f g\nstates x y z\ninit x\ntrans x -> y : tau [f]\ntrans y -> z : tau [g]\n");
    let u = f.universe().clone();
    let idx = |fs: &[&str]| u.index_of(&Product::new(fs.iter().copied())).unwrap();
    assert_eq!(fts_tau_step(&f, 0, idx(&["f", "g"])).count_ones(..), 3);
    assert_eq!(
        fts_tau_step(&f, 0, idx(&["g"])).ones().collect::<Vec<_>>(),
        vec![0]
    );
    assert_eq!(fts_tau_step(&f, 0, idx(&["f"])).count_ones(..), 2);
    let plain = fts("features f\nstates x y\ninit x\ntrans x -> y : a\n");
    assert_eq!(fts_tau_step(&plain, 0, 0).count_ones(..), 1);
}

#[test]
fn fig2_relation_under_constraint() {
    let (l, r, rel) = fig2(fig2_universe(false));
    let v = check_feature_bisimulation(&l, &r, &rel).unwrap();
    assert!(v.is_bfb, "{v:?}");
    assert!(v.is_coherent);
    assert!(bisimilar_fts_oracle(&l, &r).unwrap());
}

#[test]
fn fig2_relation_with_violating_product() {
    let u = fig2_universe(true);
    let bad = u.index_of(&Product::new(["a1", "a2", "b1"])).unwrap();
    let (l, r, rel) = fig2(u);
    let v = check_feature_bisimulation(&l, &r, &rel).unwrap();
    assert!(!v.is_bfb);
    let cx = v.counterexample.unwrap();
    assert_eq!(cx.kind, FailureKind::Transfer);
    assert_eq!(cx.product, bad);
    assert!(!bisimilar_fts_oracle(&l, &r).unwrap());
}

#[test]
fn identity_relation_is_coherent() {
    let f = fts(FIG3_U);
    let rel = FeatureRelation::new((0..f.num_states()).map(|s| (s, f.universe().full(), s)));
    let v = check_feature_bisimulation(&f, &f, &rel).unwrap();
    assert!(v.is_bfb && v.is_coherent);
}

#[test]
fn incoherent_relation_is_flagged() {
    // U ~ T by splitting u2 and u3 over f, which coherence forbids
    let u = fts(FIG3_U);
    let t = fts(FIG3_T);
    let uni = u.universe().clone();
    let f = uni.denote(&FeatureExpr::atom("f")).unwrap();
    let nf = f.complement();
    let rel = FeatureRelation::new([
        (0, uni.full(), 0),
        (1, nf.clone(), 1),
        (1, f.clone(), 2),
        (2, f.clone(), 1),
        (2, nf.clone(), 2),
    ]);
    let v = check_feature_bisimulation(&u, &t, &rel).unwrap();
    assert!(v.is_bfb, "{v:?}");
    assert!(!v.is_coherent);
    assert_eq!(v.counterexample.unwrap().kind, FailureKind::Incoherent);
}

#[test]
fn fig3_minimizes_to_chain() {
    let s = fts(FIG3_S);
    let (pre, _) = s.preprocess();
    let sp = refine_fts(&pre);
    let classes: Vec<Vec<usize>> = sp.classes().into_iter().collect();
    assert_eq!(classes, vec![vec![0], vec![1, 2], vec![3]]);
    let (m, rel) = minimize(&s).unwrap();
    assert_eq!((m.num_states(), m.num_transitions()), (3, 2));
    assert!(fts_isomorphic(&m, &fts(FIG3_T)));
    let v = check_feature_bisimulation(&s, &m, &rel).unwrap();
    assert!(v.is_bfb && v.is_coherent);
    assert!(bisimilar_fts_oracle(&s, &fts(FIG3_T)).unwrap());
    assert!(bisimilar_fts_oracle(&s, &fts(FIG3_U)).unwrap());
}

#[test]
fn fig4_minimizes_to_u() {
    let s = fts(FIG4_S);
    let (pre, _) = s.preprocess();
    let sp = refine_fts(&pre);
    assert_eq!(sp.num_blocks(), 3);
    assert!(find_splitter(&pre, &sp).is_none());
    // regression value; s4 joins both the s2 and the s3 block
    let classes: Vec<Vec<usize>> = sp.classes().into_iter().collect();
    assert_eq!(classes, vec![vec![0], vec![1, 3], vec![2, 3]]);
    let (m, rel) = minimize(&s).unwrap();
    assert_eq!(m.num_states(), 3);
    assert!(fts_isomorphic(&m, &fts(FIG4_U)));
    let v = check_feature_bisimulation(&s, &m, &rel).unwrap();
    assert!(v.is_bfb && v.is_coherent, "{v:?}");
}

#[test]
fn fig4_splitter_on_trivial_partition() {
    let s = fts(FIG4_S);
    let (pre, _) = s.preprocess();
    let sp = SemiPartition::trivial(pre.num_states());
    let cert = find_splitter(&pre, &sp).unwrap();
    assert!(!cert.pos.is_empty() && !cert.neg.is_empty());
    for &p in &cert.pos {
        assert!(cert.non_neg.contains(&p));
    }
    let a_f = crate::transys::FeaturedLabel {
        action: pre.alphabet().id("a").unwrap(),
        guard: pre.universe().denote(&FeatureExpr::atom("f")).unwrap(),
    };
    // s2 does a|f into S itself
    assert!(pos(&pre, &sp, 0, 0, &a_f).contains(&1));
    // s3 and s4 are deadlocked but only s3 is reachable under f
    let neg_set = neg(&pre, &sp, 0, 0, &a_f);
    assert!(neg_set.contains(&2));
    assert!(!neg_set.contains(&3));
}

#[test]
fn vacuous_label_keeps_block_whole() {
    // ψ = f never meets ρ of the !f-only states y, z
    let f = fts("features f\nstates x y z w\ninit x\ntrans x -> y : a [!f]\ntrans y -> z : b [!f]\ntrans x -> w : c [f]\n");
    let (pre, _) = f.preprocess();
    let sp = SemiPartition::new(pre.num_states(), vec![vec![0], vec![1, 2], vec![3]]).unwrap();
    let label = crate::transys::FeaturedLabel {
        action: pre.alphabet().id("c").unwrap(),
        guard: pre.universe().denote(&FeatureExpr::atom("f")).unwrap(),
    };
    assert_eq!(non_neg(&pre, &sp, 1, 2, &label), vec![1, 2]);
}

#[test]
fn single_state_has_no_splitter() {
    let f = fts("features f\nstates x\ninit x\ntrans x -> x : a [f]\n");
    assert!(find_splitter(&f, &SemiPartition::trivial(1)).is_none());
    let (m, _) = minimize(&f).unwrap();
    assert_eq!(m.num_states(), 1);
}

#[test]
fn distinguishable_states_become_singletons() {
    let f = fts("features f\nstates x y z\ninit x\ntrans x -> y : a\ntrans y -> z : b\n");
    assert_eq!(refine_fts(&f).num_blocks(), 3);
    let f = fts("features f\nstates x y z\ninit x\ntrans x -> y : a\ntrans y -> z : tau\n");
    assert_eq!(minimize(&f).unwrap().0.num_states(), 2);
}

#[test]
fn semi_partition_validation() {
    assert!(SemiPartition::new(3, vec![vec![0, 1], vec![1, 2]]).is_ok());
    assert!(SemiPartition::new(3, vec![vec![0, 1], vec![1]]).is_err());
    assert!(SemiPartition::new(3, vec![vec![0, 1]]).is_err());
    assert!(SemiPartition::new(2, vec![vec![0, 1], vec![]]).is_err());
    let sp = SemiPartition::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
    assert!(sp.related(0, 1) && !sp.related(0, 2));
    assert!(sp.refines(&SemiPartition::trivial(3)));
}

fn small_params() -> FtsParams {
    FtsParams {
        max_states: 8,
        ..FtsParams::default()
    }
}

/// All antichain covers of `0..n` by nonempty blocks.
fn all_semi_partitions(n: usize) -> Vec<SemiPartition> {
    let subsets: Vec<u32> = (1u32..1 << n).collect();
    let mut out = Vec::new();
    let mut chosen: Vec<u32> = Vec::new();
    fn rec(
        i: usize,
        subsets: &[u32],
        n: usize,
        chosen: &mut Vec<u32>,
        out: &mut Vec<SemiPartition>,
    ) {
        let full = (1u32 << n) - 1;
        if chosen.iter().fold(0, |a, b| a | b) == full {
            let blocks = chosen
                .iter()
                .map(|m| (0..n).filter(|s| m >> s & 1 == 1).collect())
                .collect();
            out.push(SemiPartition::new(n, blocks).unwrap());
        }
        for j in i..subsets.len() {
            let m = subsets[j];
            if chosen.iter().all(|&c| c & m != c && c & m != m) {
                chosen.push(m);
                rec(j + 1, subsets, n, chosen, out);
                chosen.pop();
            }
        }
    }
    rec(0, &subsets, n, &mut chosen, &mut out);
    out
}

/// s1 and s2 agree on the only product both are reachable for, but the
/// first split leaves s1 in the splitter `{s0,s1,s3}` without s2.
const OVER_REFINED: &str = "features f0 f1
products {} ; {f0} ; {f0,f1} ; {f1}
states s0 s1 s2 s3
init s0
trans s0 -> s1 : a [f0 & f1]
trans s0 -> s2 : b [!f0 | f1]
trans s1 -> s3 : tau [f0 & f1]
trans s1 -> s1 : a [f0 & f1]
trans s2 -> s3 : tau [!f0 | f1]
trans s2 -> s2 : a [!f0 | f1]
trans s3 -> s3 : tau [!f0 | f1]
";

#[test]
fn fig4_compatible_partition_pairs_s2_with_s4() {
    let (pre, _) = fts(FIG4_S).preprocess();
    let part = compatible_partition(&pre);
    assert_eq!(
        part.classes(),
        [vec![0], vec![1, 3], vec![2]].into_iter().collect()
    );
    // over budget the fallback is coherent but not the 3-state 𝒰
    let opts = MinimizeOptions {
        refine_budget: 0,
        ..Default::default()
    };
    let m = minimize_with(&fts(FIG4_S), &opts).unwrap();
    assert_eq!(m.route, Route::Partition);
    assert_eq!(m.fts.num_states(), 3);
    assert!(!fts_isomorphic(&m.fts, &fts(FIG4_U)));
    let v = check_feature_bisimulation(&fts(FIG4_S), &m.fts, &m.relation).unwrap();
    assert!(v.is_bfb && v.is_coherent);
}

#[test]
fn overlapping_splitter_over_refines() {
    let f = fts(OVER_REFINED);
    let (pre, _) = f.preprocess();
    let result = refine_fts(&pre);
    assert_eq!(result.num_blocks(), 4);
    let coarser = SemiPartition::new(4, vec![vec![0], vec![1, 2], vec![3]]).unwrap();
    assert!(find_splitter(&pre, &coarser).is_none());
    assert!(!coarser.refines(&result));
    // the coarser one is a genuine 3-state reduction
    let q = quotient_fts(&pre, &coarser);
    assert_eq!(q.num_states(), 3);
    assert!(bisimilar_fts_oracle(&f, &q).unwrap());
    let rel = FeatureRelation::new((0..4).map(|s| {
        let b = coarser.blocks_of(s)[0];
        (s, pre.reachability().get(s).clone(), b)
    }));
    let v = check_feature_bisimulation(&pre, &q, &rel).unwrap();
    assert!(v.is_bfb && v.is_coherent);
    assert_eq!(minimize(&f).unwrap().0.num_states(), 4);
}

#[test]
fn semi_partition_enumeration_counts() {
    // antichain covers of a 3-element set by nonempty sets
    assert_eq!(all_semi_partitions(1).len(), 1);
    assert_eq!(all_semi_partitions(2).len(), 2);
    assert_eq!(all_semi_partitions(3).len(), 9);
    assert_eq!(all_semi_partitions(4).len(), 114);
}

/// The refinement loop written directly over [`find_splitter`].
fn refine_by_scanning(pre: &Fts) -> SemiPartition {
    let n = pre.num_states();
    let mut blocks: Vec<Vec<usize>> = vec![(0..n).collect()];
    loop {
        let sp = SemiPartition::new(n, blocks.clone()).unwrap();
        let Some(c) = find_splitter(pre, &sp) else {
            return sp;
        };
        let old = blocks.remove(c.block);
        let rest: Vec<usize> = old.into_iter().filter(|s| !c.pos.contains(s)).collect();
        for nb in [c.non_neg, rest] {
            if !blocks.iter().any(|b| nb.iter().all(|s| b.contains(s))) {
                blocks.push(nb);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn incremental_refinement_matches_scanning(seed in any::<u64>()) {
        let f = random_fts(&mut rng(seed), &small_params());
        let (pre, _) = f.preprocess();
        let fast = refine_fts(&pre);
        let slow = refine_by_scanning(&pre);
        prop_assert_eq!(fast.blocks(), slow.blocks());
        let clean = refine_fts_with(&pre, SplitOrder::CleanFirst);
        prop_assert!(find_splitter(&pre, &clean).is_none());
    }

    #[test]
    fn minimize_is_sound(seed in any::<u64>()) {
        let f = random_fts(&mut rng(seed), &small_params());
        let m = minimize_with(&f, &MinimizeOptions::default()).unwrap();
        prop_assert!(bisimilar_fts_oracle(&f, &m.fts).unwrap());
        let v = check_feature_bisimulation(&f, &m.fts, &m.relation).unwrap();
        prop_assert!(v.is_bfb && v.is_coherent, "{:?}", v);
        prop_assert!(find_splitter(&m.reduced, &m.refined).is_none());
        prop_assert!(find_splitter(&m.reduced, &m.cover.partition).is_none());
    }

    #[test]
    fn budget_fallbacks_are_sound(seed in any::<u64>(), budget in prop::sample::select(vec![0u64, 300])) {
        let f = random_fts(&mut rng(seed), &small_params());
        let opts = MinimizeOptions { refine_budget: budget, ..Default::default() };
        let m = minimize_with(&f, &opts).unwrap();
        prop_assert!(bisimilar_fts_oracle(&f, &m.fts).unwrap());
        let v = check_feature_bisimulation(&f, &m.fts, &m.relation).unwrap();
        prop_assert!(v.is_bfb && v.is_coherent, "{:?} {:?}", m.route, v);
        prop_assert!(find_splitter(&m.reduced, &m.cover.partition).is_none());
        prop_assert!(m.fts.num_states() <= m.preprocessed.num_states());
    }

    #[test]
    fn compatible_classes_agree_in_every_product(seed in any::<u64>()) {
        let f = random_fts(&mut rng(seed), &small_params());
        let (pre, _) = f.preprocess();
        let part = compatible_partition(&pre);
        prop_assert!(part.is_cover());
        prop_assert_eq!(part.blocks().iter().map(|b| b.count_ones(..)).sum::<usize>(), pre.num_states());
        let q = quotient_fts(&pre, &part);
        prop_assert!(bisimilar_fts_oracle(&pre, &q).unwrap());
    }

    #[test]
    fn minimize_is_idempotent(seed in any::<u64>()) {
        let f = random_fts(&mut rng(seed), &small_params());
        let (m1, _) = minimize(&f).unwrap();
        let (m2, _) = minimize(&m1).unwrap();
        // quotient guards are not re-strengthened by the quotient's own ρ
        let (m1_pre, _) = m1.preprocess();
        prop_assert!(fts_isomorphic(&m1_pre, &m2));
        prop_assert_eq!(m1.num_states(), m2.num_states());
    }

    #[test]
    fn single_product_degenerates_to_lts(seed in any::<u64>()) {
        let params = FtsParams { max_products: 1, ..small_params() };
        let f = random_fts(&mut rng(seed), &params);
        let (m, _) = minimize(&f).unwrap();
        let (reach, _) = f.project_index(0).restrict_reachable();
        prop_assert_eq!(m.num_states(), minimize_lts(&reach).num_states());
    }

    #[test]
    fn stable_semi_partitions_refine_the_result(seed in any::<u64>()) {
        // see `overlapping_splitter_over_refines` for why one product
        let params = FtsParams { max_states: 5, max_products: 1, ..FtsParams::default() };
        let f = random_fts(&mut rng(seed), &params);
        let (pre, _) = f.preprocess();
        let result = refine_fts(&pre);
        for c in all_semi_partitions(pre.num_states()) {
            if find_splitter(&pre, &c).is_none() {
                prop_assert!(c.refines(&result), "{:?} is stable but does not refine {:?}", c.classes(), result.classes());
            }
        }
    }
}
