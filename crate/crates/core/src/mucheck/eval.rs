use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use super::desugar::desugar;
use super::formula::{ActionFormula, MuFormula, RegularFormula};
use crate::transys::{ActionId, Lts};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MuError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
}

/// Result of checking a formula on an LTS.
#[derive(Clone, Debug)]
pub struct Evaluation {
    /// Whether the initial state satisfies the formula.
    pub holds: bool,
    pub states: FixedBitSet,
    /// Most approximation steps that changed the set, over all fixpoint
    /// computations. Never exceeds the number of states.
    pub max_rounds: usize,
}

/// Checks `formula` on `lts`. Regular modalities are desugared first; μ
/// and ν are computed by iteration from the empty and the full set.
pub fn evaluate(lts: &Lts, formula: &MuFormula) -> Result<Evaluation, MuError> {
    if let Some(x) = formula.free_vars().into_iter().next() {
        return Err(MuError::UnboundVariable(x));
    }
    let core = desugar(formula);
    let mut c = Compiler {
        lts,
        nodes: Vec::new(),
        scope: Vec::new(),
        slots: 0,
    };
    let root = c.compile(&core);
    let mut ev = Evaluator {
        lts,
        cache: vec![None; c.nodes.len()],
        nodes: c.nodes,
        env: vec![FixedBitSet::with_capacity(lts.num_states()); c.slots],
        max_rounds: 0,
    };
    let states = ev.eval(root);
    Ok(Evaluation {
        holds: states.contains(lts.initial()),
        states,
        max_rounds: ev.max_rounds,
    })
}

/// The action names a formula mentions.
pub fn relevant_actions(formula: &MuFormula) -> BTreeSet<String> {
    formula.literals()
}

/// Which actions of `lts` satisfy `af`, by action id.
pub fn matching_actions(lts: &Lts, af: &ActionFormula) -> Vec<bool> {
    lts.alphabet()
        .ids()
        .map(|a| {
            if a.is_tau() {
                af.matches_tau()
            } else {
                af.matches_visible(lts.alphabet().name(a))
            }
        })
        .collect()
}

enum Node {
    True,
    False,
    Var(usize),
    And(usize, usize),
    Or(usize, usize),
    Box(Vec<bool>, usize),
    Diamond(Vec<bool>, usize),
    Mu(usize, usize),
    Nu(usize, usize),
}

struct Compiled {
    node: Node,
    /// No variable occurs free below this node.
    closed: bool,
}

struct Compiler<'a> {
    lts: &'a Lts,
    nodes: Vec<Compiled>,
    scope: Vec<(String, usize)>,
    slots: usize,
}

impl Compiler<'_> {
    fn push(&mut self, node: Node, closed: bool) -> usize {
        self.nodes.push(Compiled { node, closed });
        self.nodes.len() - 1
    }

    fn closed(&self, i: usize) -> bool {
        self.nodes[i].closed
    }

    /// `f` is core and closed under the current scope.
    fn compile(&mut self, f: &MuFormula) -> usize {
        match f {
            MuFormula::True => self.push(Node::True, true),
            MuFormula::False => self.push(Node::False, true),
            MuFormula::Var(x) => {
                let slot = self
                    .scope
                    .iter()
                    .rev()
                    .find(|(y, _)| y == x)
                    .map(|&(_, s)| s)
                    .expect("closedness checked before compiling");
                self.push(Node::Var(slot), false)
            }
            MuFormula::And(a, b) | MuFormula::Or(a, b) => {
                let (a, b) = (self.compile(a), self.compile(b));
                let closed = self.closed(a) && self.closed(b);
                let node = if matches!(f, MuFormula::And(..)) {
                    Node::And(a, b)
                } else {
                    Node::Or(a, b)
                };
                self.push(node, closed)
            }
            MuFormula::Box(r, body) | MuFormula::Diamond(r, body) => {
                let RegularFormula::Act(af) = r else {
                    unreachable!("desugared formula");
                };
                let m = matching_actions(self.lts, af);
                let body = self.compile(body);
                let closed = self.closed(body);
                let node = if matches!(f, MuFormula::Box(..)) {
                    Node::Box(m, body)
                } else {
                    Node::Diamond(m, body)
                };
                self.push(node, closed)
            }
            MuFormula::Mu(x, body) | MuFormula::Nu(x, body) => {
                let slot = self.slots;
                self.slots += 1;
                self.scope.push((x.clone(), slot));
                let inner = self.compile(body);
                self.scope.pop();
                let closed = self.closes(inner, slot);
                let node = if matches!(f, MuFormula::Mu(..)) {
                    Node::Mu(slot, inner)
                } else {
                    Node::Nu(slot, inner)
                };
                self.push(node, closed)
            }
        }
    }

    /// Whether binding `slot` leaves no free variable in `i`.
    fn closes(&self, i: usize, slot: usize) -> bool {
        match &self.nodes[i].node {
            _ if self.nodes[i].closed => true,
            Node::Var(s) => *s == slot,
            Node::And(a, b) | Node::Or(a, b) => self.closes(*a, slot) && self.closes(*b, slot),
            Node::Box(_, a) | Node::Diamond(_, a) | Node::Mu(_, a) | Node::Nu(_, a) => {
                self.closes(*a, slot)
            }
            Node::True | Node::False => true,
        }
    }
}

struct Evaluator<'a> {
    lts: &'a Lts,
    nodes: Vec<Compiled>,
    cache: Vec<Option<FixedBitSet>>,
    env: Vec<FixedBitSet>,
    max_rounds: usize,
}

impl Evaluator<'_> {
    fn eval(&mut self, i: usize) -> FixedBitSet {
        if let Some(s) = &self.cache[i] {
            return s.clone();
        }
        let n = self.lts.num_states();
        let out = match &self.nodes[i].node {
            Node::True => {
                let mut s = FixedBitSet::with_capacity(n);
                s.insert_range(..);
                s
            }
            Node::False => FixedBitSet::with_capacity(n),
            Node::Var(slot) => self.env[*slot].clone(),
            &Node::And(a, b) => {
                let mut s = self.eval(a);
                s.intersect_with(&self.eval(b));
                s
            }
            &Node::Or(a, b) => {
                let mut s = self.eval(a);
                s.union_with(&self.eval(b));
                s
            }
            Node::Box(..) | Node::Diamond(..) => self.modality(i),
            &Node::Mu(slot, body) | &Node::Nu(slot, body) => {
                let mut cur = FixedBitSet::with_capacity(n);
                if matches!(self.nodes[i].node, Node::Nu(..)) {
                    cur.insert_range(..);
                }
                let mut rounds = 0;
                loop {
                    self.env[slot] = cur.clone();
                    let next = self.eval(body);
                    if next == cur {
                        break;
                    }
                    rounds += 1;
                    cur = next;
                }
                self.max_rounds = self.max_rounds.max(rounds);
                cur
            }
        };
        if self.nodes[i].closed {
            self.cache[i] = Some(out.clone());
        }
        out
    }

    fn modality(&mut self, i: usize) -> FixedBitSet {
        let (is_box, body) = match &self.nodes[i].node {
            Node::Box(_, b) => (true, *b),
            Node::Diamond(_, b) => (false, *b),
            _ => unreachable!(),
        };
        let target = self.eval(body);
        let (Node::Box(m, _) | Node::Diamond(m, _)) = &self.nodes[i].node else {
            unreachable!()
        };
        let mut out = FixedBitSet::with_capacity(self.lts.num_states());
        for s in 0..self.lts.num_states() {
            let mut steps = self
                .lts
                .outgoing(s)
                .iter()
                .filter(|&&(_, a, _)| m[ActionId::index(a)])
                .map(|&(_, _, t)| target.contains(t));
            let sat = if is_box {
                steps.all(|x| x)
            } else {
                steps.any(|x| x)
            };
            if sat {
                out.insert(s);
            }
        }
        out
    }
}
