use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use super::FtsMinError;
use crate::featurecore::ProductSet;
use crate::ltsmin::branching_bisimilar;
use crate::transys::{ActionId, Alphabet, Fts, TAU};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateRef {
    pub side: Side,
    pub index: usize,
}

/// Triples `(s, φ, t)` with `s` a state of the left system and `t` of the
/// right one. The mirrored triples `(t, φ, s)` are implied.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FeatureRelation {
    triples: Vec<(usize, ProductSet, usize)>,
}

impl FeatureRelation {
    /// Drops empty guards and exact duplicates. Triples with equal
    /// endpoints but different guards stay separate.
    pub fn new(triples: impl IntoIterator<Item = (usize, ProductSet, usize)>) -> Self {
        let mut out: Vec<(usize, ProductSet, usize)> = Vec::new();
        for t in triples {
            if !t.1.is_empty() && !out.contains(&t) {
                out.push(t);
            }
        }
        FeatureRelation { triples: out }
    }

    pub fn triples(&self) -> &[(usize, ProductSet, usize)] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureKind {
    /// A move of `from` under `product` has no matching move from `to`.
    Transfer,
    /// ρ(from) is not contained in the triple's guard.
    Incoherent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub kind: FailureKind,
    pub from: StateRef,
    pub guard: ProductSet,
    pub to: StateRef,
    /// The unmatched transition `(action, target)`, for transfer failures.
    pub transition: Option<(String, StateRef)>,
    /// Index in the universe of the product witnessing the failure.
    pub product: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub is_bfb: bool,
    /// Implies `is_bfb`.
    pub is_coherent: bool,
    pub counterexample: Option<Counterexample>,
}

/// Both systems side by side over their joint alphabet; right states are
/// shifted by the left state count.
struct View {
    n_left: usize,
    out: Vec<Vec<(ActionId, ProductSet, usize)>>,
    names: Arc<Alphabet>,
}

impl View {
    fn new(left: &Fts, right: Option<&Fts>) -> View {
        let names = Arc::new(match right {
            Some(r) => left.alphabet().union(r.alphabet()),
            None => (**left.alphabet()).clone(),
        });
        let mut out = Vec::new();
        for (fts, off) in std::iter::once((left, 0)).chain(right.map(|r| (r, left.num_states()))) {
            for s in 0..fts.num_states() {
                out.push(
                    fts.outgoing(s)
                        .iter()
                        .map(|t| {
                            let a = names
                                .id(fts.alphabet().name(t.action))
                                .expect("joint alphabet");
                            (a, t.guard.clone(), t.dst + off)
                        })
                        .collect(),
                );
            }
        }
        View {
            n_left: left.num_states(),
            out,
            names,
        }
    }

    fn state_ref(&self, x: usize) -> StateRef {
        if x < self.n_left {
            StateRef {
                side: Side::Left,
                index: x,
            }
        } else {
            StateRef {
                side: Side::Right,
                index: x - self.n_left,
            }
        }
    }

    fn tau_step(&self, x: usize, p: usize) -> FixedBitSet {
        let mut seen = FixedBitSet::with_capacity(self.out.len());
        seen.insert(x);
        let mut stack = vec![x];
        while let Some(u) = stack.pop() {
            for (a, g, v) in &self.out[u] {
                if *a == TAU && g.contains(p) && !seen.put(*v) {
                    stack.push(*v);
                }
            }
        }
        seen
    }
}

/// States reachable from `s` by τ-steps all enabled for product `p`,
/// including `s` itself.
pub fn fts_tau_step(fts: &Fts, s: usize, p: usize) -> FixedBitSet {
    View::new(fts, None).tau_step(s, p)
}

/// Checks the transfer condition in both directions and coherence of the
/// left components.
pub fn check_feature_bisimulation(
    left: &Fts,
    right: &Fts,
    rel: &FeatureRelation,
) -> Result<Verdict, FtsMinError> {
    if left.universe() != right.universe() {
        return Err(FtsMinError::UniverseMismatch);
    }
    let nu = left.universe().len();
    for (s, g, t) in rel.triples() {
        if *s >= left.num_states() {
            return Err(FtsMinError::StateOutOfRange {
                side: Side::Left,
                index: *s,
            });
        }
        if *t >= right.num_states() {
            return Err(FtsMinError::StateOutOfRange {
                side: Side::Right,
                index: *t,
            });
        }
        if g.universe_len() != nu {
            return Err(FtsMinError::UniverseMismatch);
        }
    }
    let view = View::new(left, Some(right));
    let off = left.num_states();
    // union of guards per ordered pair, in both directions
    let mut pairs: HashMap<(usize, usize), ProductSet> = HashMap::new();
    let mut directed = Vec::with_capacity(2 * rel.len());
    for (s, g, t) in rel.triples() {
        for (x, y) in [(*s, *t + off), (*t + off, *s)] {
            pairs
                .entry((x, y))
                .or_insert_with(|| left.universe().empty())
                .union_with(g);
            directed.push((x, g, y));
        }
    }
    let related = |x: usize, y: usize, p: usize| pairs.get(&(x, y)).is_some_and(|g| g.contains(p));

    for &(x, g, y) in &directed {
        for (a, guard, x2) in &view.out[x] {
            for p in g.intersection(guard).ones() {
                let matched = view.tau_step(y, p).ones().any(|yh| {
                    related(x, yh, p)
                        && ((*a == TAU && related(*x2, yh, p))
                            || view.out[yh].iter().any(|(b, g2, y2)| {
                                b == a && g2.contains(p) && related(*x2, *y2, p)
                            }))
                });
                if !matched {
                    return Ok(Verdict {
                        is_bfb: false,
                        is_coherent: false,
                        counterexample: Some(Counterexample {
                            kind: FailureKind::Transfer,
                            from: view.state_ref(x),
                            guard: g.clone(),
                            to: view.state_ref(y),
                            transition: Some((
                                view.names.name(*a).to_string(),
                                view.state_ref(*x2),
                            )),
                            product: p,
                        }),
                    });
                }
            }
        }
    }
    let rho = left.reachability();
    for (s, g, t) in rel.triples() {
        if let Some(p) = rho.get(*s).difference(g).ones().next() {
            return Ok(Verdict {
                is_bfb: true,
                is_coherent: false,
                counterexample: Some(Counterexample {
                    kind: FailureKind::Incoherent,
                    from: view.state_ref(*s),
                    guard: g.clone(),
                    to: view.state_ref(*t + off),
                    transition: None,
                    product: p,
                }),
            });
        }
    }
    Ok(Verdict {
        is_bfb: true,
        is_coherent: true,
        counterexample: None,
    })
}

/// Whether every product's projections of `f1` and `f2` are branching
/// bisimilar.
pub fn bisimilar_fts_oracle(f1: &Fts, f2: &Fts) -> Result<bool, FtsMinError> {
    if f1.universe() != f2.universe() {
        return Err(FtsMinError::UniverseMismatch);
    }
    Ok((0..f1.universe().len())
        .all(|p| branching_bisimilar(&f1.project_index(p), &f2.project_index(p))))
}
