use std::collections::{HashMap, VecDeque};

use super::{Fts, Lts};
use crate::featurecore::ProductSet;

/// Whether two LTSs are equal up to a bijective state renaming that maps
/// initial state to initial state. Actions are compared by name.
/// Exponential in the worst case; intended for small systems.
pub fn lts_isomorphic(a: &Lts, b: &Lts) -> bool {
    let edges = |l: &Lts| -> Vec<(usize, String, usize)> {
        l.transitions()
            .iter()
            .map(|&(s, x, t)| (s, l.alphabet().name(x).to_string(), t))
            .collect()
    };
    find_isomorphism(
        a.num_states(),
        a.initial(),
        &edges(a),
        b.num_states(),
        b.initial(),
        &edges(b),
    )
    .is_some()
}

/// Like [`lts_isomorphic`], additionally requiring equal guards over equal
/// product sets.
pub fn fts_isomorphic(a: &Fts, b: &Fts) -> bool {
    if **a.universe() != **b.universe() {
        return false;
    }
    let edges = |f: &Fts| -> Vec<(usize, (String, ProductSet), usize)> {
        f.transitions()
            .iter()
            .map(|t| {
                (
                    t.src,
                    (f.alphabet().name(t.action).to_string(), t.guard.clone()),
                    t.dst,
                )
            })
            .collect()
    };
    find_isomorphism(
        a.num_states(),
        a.initial(),
        &edges(a),
        b.num_states(),
        b.initial(),
        &edges(b),
    )
    .is_some()
}

type EdgeMap<K> = HashMap<(usize, usize), Vec<K>>;

fn find_isomorphism<K: Ord + Clone + std::hash::Hash>(
    n1: usize,
    init1: usize,
    e1: &[(usize, K, usize)],
    n2: usize,
    init2: usize,
    e2: &[(usize, K, usize)],
) -> Option<Vec<usize>> {
    if n1 != n2 || e1.len() != e2.len() {
        return None;
    }
    let n = n1;
    let build = |edges: &[(usize, K, usize)], init: usize| {
        let mut map: EdgeMap<K> = HashMap::new();
        let mut sig: Vec<(bool, Vec<K>, Vec<K>)> =
            (0..n).map(|s| (s == init, vec![], vec![])).collect();
        for (s, k, t) in edges {
            map.entry((*s, *t)).or_default().push(k.clone());
            sig[*s].1.push(k.clone());
            sig[*t].2.push(k.clone());
        }
        for v in map.values_mut() {
            v.sort();
        }
        for s in &mut sig {
            s.1.sort();
            s.2.sort();
        }
        (map, sig)
    };
    let (m1, sig1) = build(e1, init1);
    let (m2, sig2) = build(e2, init2);

    let mut adj = vec![Vec::new(); n];
    for (s, _, t) in e1 {
        adj[*s].push(*t);
        adj[*t].push(*s);
    }
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in std::iter::once(init1).chain(0..n) {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut q = VecDeque::from([start]);
        while let Some(s) = q.pop_front() {
            order.push(s);
            for &t in &adj[s] {
                if !seen[t] {
                    seen[t] = true;
                    q.push_back(t);
                }
            }
        }
    }

    let empty: Vec<K> = Vec::new();
    let get = |m: &EdgeMap<K>, s: usize, t: usize| -> Vec<K> {
        m.get(&(s, t)).cloned().unwrap_or_else(|| empty.clone())
    };
    let mut f = vec![usize::MAX; n];
    let mut used = vec![false; n];

    #[allow(clippy::too_many_arguments)]
    fn search<K: Ord + Clone>(
        k: usize,
        order: &[usize],
        f: &mut Vec<usize>,
        used: &mut Vec<bool>,
        sig1: &[(bool, Vec<K>, Vec<K>)],
        sig2: &[(bool, Vec<K>, Vec<K>)],
        m1: &EdgeMap<K>,
        m2: &EdgeMap<K>,
        get: &dyn Fn(&EdgeMap<K>, usize, usize) -> Vec<K>,
    ) -> bool {
        if k == order.len() {
            return true;
        }
        let u = order[k];
        for v in 0..sig2.len() {
            if used[v] || sig1[u] != sig2[v] {
                continue;
            }
            f[u] = v;
            let consistent = order[..=k]
                .iter()
                .all(|&w| get(m1, u, w) == get(m2, v, f[w]) && get(m1, w, u) == get(m2, f[w], v));
            if consistent {
                used[v] = true;
                if search(k + 1, order, f, used, sig1, sig2, m1, m2, get) {
                    return true;
                }
                used[v] = false;
            }
            f[u] = usize::MAX;
        }
        false
    }

    search(0, &order, &mut f, &mut used, &sig1, &sig2, &m1, &m2, &get).then_some(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transys::LtsBuilder;

    fn lts(edges: &[(&str, &str, &str)], init: &str) -> Lts {
        let mut b = LtsBuilder::new();
        for (s, a, t) in edges {
            b.transition(s, a, t).unwrap();
        }
        b.initial(init).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn renamed_systems_are_isomorphic() {
        let a = lts(&[("x", "a", "y"), ("y", "b", "z")], "x");
        let b = lts(&[("q", "b", "r"), ("p", "a", "q")], "p");
        assert!(lts_isomorphic(&a, &b));
    }

    #[test]
    fn initial_state_matters() {
        let a = lts(&[("x", "a", "y")], "x");
        let b = lts(&[("x", "a", "y")], "y");
        assert!(!lts_isomorphic(&a, &b));
        let c = lts(&[("x", "b", "y")], "x");
        assert!(!lts_isomorphic(&a, &c));
    }
}
