//! Graph coloring as FTS minimization: the encoding whose minimal coherent
//! quotient has χ(G) + 2 states, and a brute-force χ oracle.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::featurecore::{Product, Universe};
use crate::transys::{Alphabet, Fts, FtsTransition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("a graph needs at least one node")]
    NoNodes,
    #[error("edge {0}-{1} references a node out of range")]
    NodeOutOfRange(usize, usize),
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{nodes} nodes exceed the chromatic oracle limit of {limit}")]
    TooLarge { nodes: usize, limit: usize },
}

/// Undirected simple graph on nodes `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::NoNodes);
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::NodeOutOfRange(u, v));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
        }
        Ok(Graph { n, edges: set })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Graph::new(n, edges).expect("complete graph is simple")
    }

    pub fn cycle(n: usize) -> Self {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle needs at least 3 nodes")
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    /// Edges as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&u| self.has_edge(u, v)).collect()
    }

    /// Whether `colors` assigns different colors to adjacent nodes.
    pub fn is_proper(&self, colors: &[usize]) -> bool {
        colors.len() == self.n && self.edges.iter().all(|&(u, v)| colors[u] != colors[v])
    }
}

/// Reads `nodes n` followed by `edge i j` lines; `#` starts a comment.
pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    let mut n = None;
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| GraphError::Syntax {
            line: line_no,
            message,
        };
        let content = line.split('#').next().unwrap_or("");
        let words: Vec<&str> = content.split_whitespace().collect();
        let num = |w: &str| {
            w.parse::<usize>()
                .map_err(|_| err(format!("expected a number, found `{w}`")))
        };
        match words.as_slice() {
            [] => {}
            ["nodes", k] => {
                if n.is_some() {
                    return Err(err("duplicate `nodes` line".into()));
                }
                n = Some(num(k)?);
            }
            ["edge", u, v] => {
                if n.is_none() {
                    return Err(err("`edge` before `nodes`".into()));
                }
                edges.push((num(u)?, num(v)?));
            }
            _ => {
                return Err(err(format!(
                    "expected `nodes n` or `edge i j`, found `{}`",
                    content.trim()
                )))
            }
        }
    }
    let n = n.ok_or(GraphError::Syntax {
        line: 1,
        message: "missing `nodes` line".into(),
    })?;
    Graph::new(n, edges)
}

pub fn serialize_graph(g: &Graph) -> String {
    let mut out = format!("nodes {}\n", g.n);
    for (u, v) in g.edges() {
        let _ = writeln!(out, "edge {u} {v}");
    }
    out
}

/// Feature `f{v}` per node, products `{f{v}}`, states `s1`, `s2` and `v{i}`,
/// single action `a`, initial `s1`. θ(s1, a, v) holds for `v` and its
/// neighbors; θ(v, a, s2) only for `v`.
pub fn encode_graph(g: &Graph) -> Fts {
    let features: Vec<String> = (0..g.n).map(|v| format!("f{v}")).collect();
    let products = features
        .iter()
        .map(|f| Product::new([f.as_str()]))
        .collect();
    let universe = Universe::new(features.clone(), products).expect("distinct singleton products");
    let product_of = |v: usize| {
        universe
            .index_of(&Product::new([features[v].as_str()]))
            .expect("declared product")
    };
    let alphabet = Arc::new(Alphabet::new(["a"]).expect("valid action"));
    let a = alphabet.id("a").expect("declared action");
    let mut names = vec!["s1".to_string(), "s2".to_string()];
    names.extend((0..g.n).map(|v| format!("v{v}")));
    let mut trans = Vec::new();
    for v in 0..g.n {
        let mut into = universe.singleton(product_of(v));
        for u in g.neighbors(v) {
            into.insert(product_of(u));
        }
        trans.push(FtsTransition {
            src: 0,
            action: a,
            dst: 2 + v,
            guard: into,
        });
        trans.push(FtsTransition {
            src: 2 + v,
            action: a,
            dst: 1,
            guard: universe.singleton(product_of(v)),
        });
    }
    Fts::new(universe, alphabet, names, trans, 0).expect("encoding is a valid system")
}

/// Thirty named graphs of at most 8 nodes: complete graphs `K1`–`K5`,
/// paths `P2`–`P8`, cycles `C4`–`C7`, eight induced subgraphs of the
/// Petersen graph, and a few small extras (empty, star, `K2,3`, wheels,
/// `K4` minus an edge).
pub fn graph_corpus() -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for n in 1..=5 {
        out.push((format!("K{n}"), Graph::complete(n)));
    }
    for n in 2..=8 {
        let path = Graph::new(n, (1..n).map(|i| (i - 1, i))).expect("path is simple");
        out.push((format!("P{n}"), path));
    }
    for n in 4..=7 {
        out.push((format!("C{n}"), Graph::cycle(n)));
    }
    // outer cycle 0..5, inner pentagram 5..10, spokes i – i+5
    let petersen: Vec<(usize, usize)> = (0..5)
        .flat_map(|i| [(i, (i + 1) % 5), (5 + i, 5 + (i + 2) % 5), (i, i + 5)])
        .collect();
    let keep_sets: [&[usize]; 8] = [
        &[0, 1, 2, 3, 4],
        &[0, 1, 2, 3, 4, 5],
        &[0, 1, 2, 5, 6, 7],
        &[0, 1, 2, 3, 4, 5, 6],
        &[0, 1, 2, 3, 5, 6, 7],
        &[0, 1, 2, 3, 4, 5, 6, 7],
        &[0, 1, 2, 3, 5, 6, 7, 8],
        &[0, 2, 4, 5, 6, 7, 8, 9],
    ];
    for (i, keep) in keep_sets.iter().enumerate() {
        let index = |v: usize| keep.iter().position(|&k| k == v);
        let edges = petersen
            .iter()
            .filter_map(|&(u, v)| Some((index(u)?, index(v)?)));
        let g = Graph::new(keep.len(), edges).expect("induced subgraph is simple");
        out.push((format!("petersen{}", i + 1), g));
    }
    let extras = [
        ("empty3", 3, vec![]),
        ("star4", 4, vec![(0, 1), (0, 2), (0, 3)]),
        (
            "K2_3",
            5,
            vec![(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)],
        ),
        (
            "wheel5",
            5,
            vec![
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 0),
                (4, 0),
                (4, 1),
                (4, 2),
                (4, 3),
            ],
        ),
        (
            "wheel6",
            6,
            vec![
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 0),
                (5, 0),
                (5, 1),
                (5, 2),
                (5, 3),
                (5, 4),
            ],
        ),
        (
            "K4_minus_edge",
            4,
            vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)],
        ),
    ];
    for (name, n, edges) in extras {
        out.push((
            name.to_string(),
            Graph::new(n, edges).expect("extra graph is simple"),
        ));
    }
    out
}

/// Largest graph accepted by [`chromatic_number`].
pub const CHROMATIC_LIMIT: usize = 10;

/// A proper coloring with the fewest colors, found by exhaustive search.
/// Colors are `0..k`; node `v` only gets a color at most one above the
/// largest used by nodes before it.
pub fn optimal_coloring(g: &Graph) -> Result<Vec<usize>, GraphError> {
    if g.n > CHROMATIC_LIMIT {
        return Err(GraphError::TooLarge {
            nodes: g.n,
            limit: CHROMATIC_LIMIT,
        });
    }
    fn extend(g: &Graph, k: usize, colors: &mut Vec<usize>, used: usize) -> bool {
        let v = colors.len();
        if v == g.n {
            return true;
        }
        for c in 0..k.min(used + 1) {
            if (0..v).all(|u| colors[u] != c || !g.has_edge(u, v)) {
                colors.push(c);
                if extend(g, k, colors, used.max(c + 1)) {
                    return true;
                }
                colors.pop();
            }
        }
        false
    }
    for k in 1..=g.n {
        let mut colors = Vec::with_capacity(g.n);
        if extend(g, k, &mut colors, 0) {
            return Ok(colors);
        }
    }
    unreachable!("n colors always suffice")
}

pub fn chromatic_number(g: &Graph) -> Result<usize, GraphError> {
    Ok(optimal_coloring(g)?.into_iter().max().map_or(0, |m| m + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ftsmin::{check_feature_bisimulation, minimize, FeatureRelation};
    use crate::gen::{random_graph, rng};

    fn guard_nodes(f: &Fts, src: usize, dst: usize) -> Vec<usize> {
        let a = f.alphabet().id("a").unwrap();
        let g = f.guard(src, a, dst).unwrap();
        let mut nodes: Vec<usize> = g
            .ones()
            .map(|p| {
                f.universe().product(p).features().next().unwrap()[1..]
                    .parse()
                    .unwrap()
            })
            .collect();
        nodes.sort_unstable();
        nodes
    }

    /// All colorings with colors `0..k`, by counting in base k.
    fn brute_chromatic(g: &Graph) -> usize {
        (1..=g.num_nodes())
            .find(|&k| {
                (0..k.pow(g.num_nodes() as u32)).any(|mut code| {
                    let colors: Vec<usize> = (0..g.num_nodes())
                        .map(|_| {
                            let c = code % k;
                            code /= k;
                            c
                        })
                        .collect();
                    g.is_proper(&colors)
                })
            })
            .unwrap()
    }

    #[test]
    fn single_node_encoding() {
        let f = encode_graph(&Graph::new(1, []).unwrap());
        assert_eq!(f.num_states(), 3);
        assert_eq!(guard_nodes(&f, 0, 2), vec![0]);
        assert_eq!(guard_nodes(&f, 2, 1), vec![0]);
    }

    #[test]
    fn triangle_guards_are_full() {
        let f = encode_graph(&Graph::complete(3));
        for v in 0..3 {
            assert!(f
                .guard(0, f.alphabet().id("a").unwrap(), 2 + v)
                .unwrap()
                .is_full());
        }
    }

    #[test]
    fn path_guard_has_both_ends() {
        let f = encode_graph(&Graph::new(2, [(0, 1)]).unwrap());
        assert_eq!(guard_nodes(&f, 0, 2), vec![0, 1]);
        assert_eq!(guard_nodes(&f, 3, 1), vec![1]);
    }

    #[test]
    fn chromatic_examples() {
        assert_eq!(chromatic_number(&Graph::new(4, []).unwrap()).unwrap(), 1);
        assert_eq!(chromatic_number(&Graph::complete(3)).unwrap(), 3);
        assert_eq!(chromatic_number(&Graph::cycle(5)).unwrap(), 3);
        assert_eq!(chromatic_number(&Graph::cycle(6)).unwrap(), 2);
        assert!(chromatic_number(&Graph::new(11, []).unwrap()).is_err());
    }

    #[test]
    fn chromatic_matches_brute_force() {
        let mut r = rng(11);
        for _ in 0..40 {
            let g = random_graph(&mut r, 6, 0.5);
            assert_eq!(chromatic_number(&g).unwrap(), brute_chromatic(&g));
        }
    }

    #[test]
    fn triangle_minimizes_to_five_states() {
        let (m, _) = minimize(&encode_graph(&Graph::complete(3))).unwrap();
        assert_eq!(m.num_states(), 5);
    }

    #[test]
    fn coloring_relation_is_coherent() {
        let mut r = rng(5);
        for _ in 0..20 {
            let g = random_graph(&mut r, 6, 0.4);
            let colors = optimal_coloring(&g).unwrap();
            let k = colors.iter().max().unwrap() + 1;
            let f = encode_graph(&g);
            let uni = f.universe().clone();
            let prod = |v: usize| {
                uni.index_of(&Product::new([format!("f{v}").as_str()]))
                    .unwrap()
            };
            // states s1, s2, then one per color
            let a = f.alphabet().id("a").unwrap();
            let mut trans = Vec::new();
            for c in 0..k {
                let mut into = uni.empty();
                let mut out = uni.empty();
                for v in (0..g.num_nodes()).filter(|&v| colors[v] == c) {
                    into.union_with(f.guard(0, a, 2 + v).unwrap());
                    out.insert(prod(v));
                }
                trans.push(FtsTransition {
                    src: 0,
                    action: a,
                    dst: 2 + c,
                    guard: into,
                });
                trans.push(FtsTransition {
                    src: 2 + c,
                    action: a,
                    dst: 1,
                    guard: out,
                });
            }
            let mut names = vec!["s1".to_string(), "s2".to_string()];
            names.extend((0..k).map(|c| format!("c{c}")));
            let colored = Fts::new(uni.clone(), f.alphabet().clone(), names, trans, 0).unwrap();
            let rho = f.reachability();
            let rel =
                FeatureRelation::new([(0, uni.full(), 0), (1, uni.full(), 1)].into_iter().chain(
                    (0..g.num_nodes()).map(|v| (2 + v, rho.get(2 + v).clone(), 2 + colors[v])),
                ));
            let v = check_feature_bisimulation(&f, &colored, &rel).unwrap();
            assert!(v.is_bfb && v.is_coherent, "{v:?}");
        }
    }

    #[test]
    fn corpus_shape() {
        let c = graph_corpus();
        assert_eq!(c.len(), 30);
        assert!(c.iter().all(|(_, g)| g.num_nodes() <= 8));
        let names: BTreeSet<&str> = c.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names.len(), 30);
        let chi =
            |name: &str| chromatic_number(&c.iter().find(|(n, _)| n == name).unwrap().1).unwrap();
        assert_eq!(chi("K5"), 5);
        assert_eq!(chi("C7"), 3);
        assert_eq!(chi("petersen1"), 3);
        assert_eq!(chi("wheel6"), 4);
        assert_eq!(chi("empty3"), 1);
    }

    #[test]
    fn graph_text_round_trip() {
        let g = parse_graph("# triangle\nnodes 3\nedge 0 1\nedge 1 2\nedge 2 0\n").unwrap();
        assert_eq!(g, Graph::complete(3));
        assert_eq!(parse_graph(&serialize_graph(&g)).unwrap(), g);
        assert!(matches!(
            parse_graph("nodes 2\nedge 0 0\n"),
            Err(GraphError::SelfLoop(0))
        ));
        assert!(matches!(
            parse_graph("nodes 2\nedge 0 1\nedge 1 0\n"),
            Err(GraphError::DuplicateEdge(1, 0))
        ));
        assert!(matches!(
            parse_graph("nodes 2\nedge 0 5\n"),
            Err(GraphError::NodeOutOfRange(0, 5))
        ));
        assert!(matches!(
            parse_graph("edge 0 1\n"),
            Err(GraphError::Syntax { line: 1, .. })
        ));
    }
}
