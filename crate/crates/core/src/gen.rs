//! Seeded random models for tests, benchmarks and the `gen` command.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

use crate::coloring::Graph;
use crate::featurecore::{Product, ProductSet, Universe};
use crate::mucheck::{ActionFormula, MuFormula, RegularFormula};
use crate::transys::{ActionId, Alphabet, Fts, FtsTransition, Lts};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug)]
pub struct FtsParams {
    pub max_states: usize,
    pub max_features: usize,
    pub max_products: usize,
    /// Probability that a transition is τ.
    pub tau_density: f64,
    pub actions: Vec<String>,
    /// Upper bound on the out-degree of each state.
    pub max_out: usize,
}

impl Default for FtsParams {
    fn default() -> Self {
        FtsParams {
            max_states: 15,
            max_features: 3,
            max_products: 8,
            tau_density: 0.3,
            actions: vec!["a".into(), "b".into()],
            max_out: 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LtsParams {
    pub max_states: usize,
    pub tau_density: f64,
    pub actions: Vec<String>,
    pub max_out: usize,
}

impl Default for LtsParams {
    fn default() -> Self {
        LtsParams {
            max_states: 30,
            tau_density: 0.3,
            actions: vec!["a".into(), "b".into(), "c".into()],
            max_out: 3,
        }
    }
}

/// A random set of distinct products over features `f0, f1, ..`.
pub fn random_universe(
    rng: &mut impl Rng,
    max_features: usize,
    max_products: usize,
) -> Arc<Universe> {
    let nf = rng.gen_range(1..=max_features.max(1));
    let features: Vec<String> = (0..nf).map(|i| format!("f{i}")).collect();
    let mut all: Vec<u32> = (0..1u32 << nf).collect();
    all.shuffle(rng);
    let k = rng.gen_range(1..=max_products.clamp(1, all.len()));
    let products = all[..k]
        .iter()
        .map(|&m| {
            Product::new(
                features
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| m >> i & 1 == 1)
                    .map(|(_, f)| f.as_str()),
            )
        })
        .collect();
    Universe::new(features, products).expect("generated products are valid")
}

fn random_guard(rng: &mut impl Rng, u: &Universe) -> ProductSet {
    if rng.gen_bool(0.3) {
        return u.full();
    }
    let mut g = u.empty();
    while g.is_empty() {
        for p in 0..u.len() {
            if rng.gen_bool(0.5) {
                g.insert(p);
            }
        }
    }
    g
}

fn random_action(rng: &mut impl Rng, alphabet: &Alphabet, tau_density: f64) -> ActionId {
    if alphabet.len() == 1 || rng.gen_bool(tau_density) {
        ActionId(0)
    } else {
        ActionId(rng.gen_range(1..alphabet.len() as u32))
    }
}

pub fn random_fts(rng: &mut impl Rng, params: &FtsParams) -> Fts {
    let universe = random_universe(rng, params.max_features, params.max_products);
    random_fts_over(rng, params, universe)
}

/// A random FTS over a given universe.
pub fn random_fts_over(rng: &mut impl Rng, params: &FtsParams, universe: Arc<Universe>) -> Fts {
    let alphabet = Arc::new(Alphabet::new(&params.actions).expect("valid action names"));
    let n = rng.gen_range(1..=params.max_states.max(1));
    let mut trans = Vec::new();
    for s in 0..n {
        for _ in 0..rng.gen_range(0..=params.max_out) {
            trans.push(FtsTransition {
                src: s,
                action: random_action(rng, &alphabet, params.tau_density),
                dst: rng.gen_range(0..n),
                guard: random_guard(rng, &universe),
            });
        }
    }
    let names = (0..n).map(|i| format!("s{i}")).collect();
    Fts::new(universe, alphabet, names, trans, 0).expect("generated system is valid")
}

pub fn random_lts(rng: &mut impl Rng, params: &LtsParams) -> Lts {
    let alphabet = Arc::new(Alphabet::new(&params.actions).expect("valid action names"));
    let n = rng.gen_range(1..=params.max_states.max(1));
    let mut trans = Vec::new();
    for s in 0..n {
        for _ in 0..rng.gen_range(0..=params.max_out) {
            trans.push((
                s,
                random_action(rng, &alphabet, params.tau_density),
                rng.gen_range(0..n),
            ));
        }
    }
    Lts::with_numbered_states(alphabet, n, trans, 0).expect("generated system is valid")
}

/// A graph with `1..=max_nodes` nodes, each edge present with
/// probability `p`.
pub fn random_graph(rng: &mut impl Rng, max_nodes: usize, p: f64) -> Graph {
    let n = rng.gen_range(1..=max_nodes.max(1));
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|_| rng.gen_bool(p))
        .collect();
    Graph::new(n, edges).expect("generated graph is simple")
}

/// A closed formula of [`MuFormula::depth`] at most `max_depth` over
/// `actions`. Box and diamond carry regular formulas with `.` and `*`
/// about half the time. Variables come from a pool of two names, so
/// shadowing occurs.
pub fn random_formula(rng: &mut impl Rng, max_depth: usize, actions: &[String]) -> MuFormula {
    let mut scope = Vec::new();
    formula_at(rng, max_depth.max(1), actions, &mut scope)
}

fn formula_at(
    rng: &mut impl Rng,
    depth: usize,
    actions: &[String],
    scope: &mut Vec<String>,
) -> MuFormula {
    let leaves = 2 + usize::from(!scope.is_empty());
    if depth == 1 {
        return match rng.gen_range(0..leaves) {
            0 => MuFormula::True,
            1 => MuFormula::False,
            _ => MuFormula::var(scope.choose(rng).expect("nonempty scope").clone()),
        };
    }
    let d = rng.gen_range(1..depth);
    let d2 = rng.gen_range(1..depth);
    match rng.gen_range(0..8 + leaves) {
        0 => MuFormula::and(
            formula_at(rng, d, actions, scope),
            formula_at(rng, d2, actions, scope),
        ),
        1 => MuFormula::or(
            formula_at(rng, d, actions, scope),
            formula_at(rng, d2, actions, scope),
        ),
        2 | 3 => MuFormula::boxed(
            random_regular(rng, actions),
            formula_at(rng, d, actions, scope),
        ),
        4 | 5 => MuFormula::diamond(
            random_regular(rng, actions),
            formula_at(rng, d, actions, scope),
        ),
        k @ (6 | 7) => {
            let x = ["X", "Y"].choose(rng).expect("nonempty pool").to_string();
            scope.push(x.clone());
            let body = formula_at(rng, depth - 1, actions, scope);
            scope.pop();
            if k == 6 {
                MuFormula::mu(x, body)
            } else {
                MuFormula::nu(x, body)
            }
        }
        _ => formula_at(rng, 1, actions, scope),
    }
}

fn random_regular(rng: &mut impl Rng, actions: &[String]) -> RegularFormula {
    let act = |rng: &mut _| RegularFormula::act(random_action_formula(rng, actions));
    match rng.gen_range(0..6) {
        0 => RegularFormula::star(act(rng)),
        1 => RegularFormula::seq(act(rng), act(rng)),
        2 => RegularFormula::seq(RegularFormula::star(act(rng)), act(rng)),
        _ => act(rng),
    }
}

fn random_action_formula(rng: &mut impl Rng, actions: &[String]) -> ActionFormula {
    let lit =
        |rng: &mut _| ActionFormula::lit(actions.choose(rng).expect("nonempty alphabet").clone());
    match rng.gen_range(0..6) {
        0 => ActionFormula::True,
        1 => ActionFormula::not(lit(rng)),
        2 => ActionFormula::or(lit(rng), lit(rng)),
        3 => ActionFormula::and(ActionFormula::not(lit(rng)), ActionFormula::not(lit(rng))),
        _ => lit(rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_model() {
        let p = FtsParams::default();
        let a = random_fts(&mut rng(7), &p);
        let b = random_fts(&mut rng(7), &p);
        assert_eq!(a.transitions(), b.transitions());
        assert_eq!(a.universe(), b.universe());
    }

    #[test]
    fn bounds_hold() {
        let p = FtsParams::default();
        let mut r = rng(1);
        for _ in 0..200 {
            let f = random_fts(&mut r, &p);
            assert!(f.num_states() <= 15);
            assert!(f.universe().len() <= 8);
            assert!(f.universe().features().len() <= 3);
        }
        let l = random_lts(&mut r, &LtsParams::default());
        assert!(l.num_states() <= 30);
    }

    #[test]
    fn formulas_are_closed_and_shallow() {
        let actions = vec!["a".to_string(), "b".to_string()];
        let mut r = rng(3);
        let mut regular = 0;
        for _ in 0..300 {
            let f = random_formula(&mut r, 4, &actions);
            assert!(f.free_vars().is_empty(), "{f}");
            assert!(f.depth() <= 4, "{f}");
            let text = f.to_string();
            assert_eq!(crate::modelio::parse_property(&text).unwrap(), f, "{text}");
            regular += usize::from(text.contains('*') || text.contains('.'));
        }
        assert!(regular > 50);
    }
}
