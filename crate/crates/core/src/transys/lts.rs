use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use super::{is_state_name, ActionId, Alphabet, TransysError, TAU, TAU_NAME};

/// A labeled transition system with sorted, duplicate-free transitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lts {
    alphabet: Arc<Alphabet>,
    state_names: Vec<String>,
    transitions: Vec<(usize, ActionId, usize)>,
    out_start: Vec<usize>,
    initial: usize,
}

impl Lts {
    /// Builds an LTS from raw parts; transitions are sorted and deduplicated.
    pub fn new(
        alphabet: Arc<Alphabet>,
        state_names: Vec<String>,
        mut transitions: Vec<(usize, ActionId, usize)>,
        initial: usize,
    ) -> Result<Self, TransysError> {
        let n = state_names.len();
        if n == 0 {
            return Err(TransysError::NoStates);
        }
        if initial >= n {
            return Err(TransysError::StateOutOfRange(initial));
        }
        for &(s, a, t) in &transitions {
            if s >= n || t >= n {
                return Err(TransysError::StateOutOfRange(s.max(t)));
            }
            if a.index() >= alphabet.len() {
                return Err(TransysError::UnknownAction(format!("#{}", a.0)));
            }
        }
        transitions.sort_unstable();
        transitions.dedup();
        let out_start = offsets(n, transitions.iter().map(|t| t.0));
        Ok(Lts {
            alphabet,
            state_names,
            transitions,
            out_start,
            initial,
        })
    }

    /// States named `0..n`.
    pub fn with_numbered_states(
        alphabet: Arc<Alphabet>,
        n: usize,
        transitions: Vec<(usize, ActionId, usize)>,
        initial: usize,
    ) -> Result<Self, TransysError> {
        Lts::new(
            alphabet,
            (0..n).map(|i| i.to_string()).collect(),
            transitions,
            initial,
        )
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.state_names[s]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn transitions(&self) -> &[(usize, ActionId, usize)] {
        &self.transitions
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn outgoing(&self, s: usize) -> &[(usize, ActionId, usize)] {
        &self.transitions[self.out_start[s]..self.out_start[s + 1]]
    }

    pub fn has_transition(&self, s: usize, a: ActionId, t: usize) -> bool {
        self.outgoing(s).binary_search(&(s, a, t)).is_ok()
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> FixedBitSet {
        let mut seen = FixedBitSet::with_capacity(self.num_states());
        let mut stack = vec![self.initial];
        seen.insert(self.initial);
        while let Some(s) = stack.pop() {
            for &(_, _, t) in self.outgoing(s) {
                if !seen.put(t) {
                    stack.push(t);
                }
            }
        }
        seen
    }

    /// The reachable part, with states renumbered in index order. Also
    /// returns, for each new state, its index in `self`.
    pub fn restrict_reachable(&self) -> (Lts, Vec<usize>) {
        let keep = self.reachable();
        let old: Vec<usize> = keep.ones().collect();
        let mut new_of = vec![usize::MAX; self.num_states()];
        for (i, &o) in old.iter().enumerate() {
            new_of[o] = i;
        }
        let trans = self
            .transitions
            .iter()
            .filter(|t| keep.contains(t.0))
            .map(|&(s, a, t)| (new_of[s], a, new_of[t]))
            .collect();
        let names = old.iter().map(|&o| self.state_names[o].clone()).collect();
        let lts = Lts::new(self.alphabet.clone(), names, trans, new_of[self.initial])
            .expect("restriction of a valid system");
        (lts, old)
    }

    /// Relabels every action outside `keep` as τ.
    pub fn hide(&self, keep: &BTreeSet<String>) -> Result<Lts, TransysError> {
        let (alphabet, remap) = hidden_alphabet(&self.alphabet, keep)?;
        let trans = self
            .transitions
            .iter()
            .map(|&(s, a, t)| (s, remap[a.index()], t))
            .collect();
        Lts::new(
            Arc::new(alphabet),
            self.state_names.clone(),
            trans,
            self.initial,
        )
    }

    /// Disjoint union over the joint alphabet; `other`'s states are shifted
    /// by `self.num_states()`. The initial state is `self`'s.
    pub fn disjoint_union(&self, other: &Lts) -> Lts {
        let alphabet = Arc::new(self.alphabet.union(&other.alphabet));
        let map_a = |from: &Alphabet, a: ActionId| alphabet.id(from.name(a)).expect("in union");
        let off = self.num_states();
        let mut trans = Vec::with_capacity(self.num_transitions() + other.num_transitions());
        for &(s, a, t) in &self.transitions {
            trans.push((s, map_a(&self.alphabet, a), t));
        }
        for &(s, a, t) in &other.transitions {
            trans.push((s + off, map_a(&other.alphabet, a), t + off));
        }
        let names = self
            .state_names
            .iter()
            .map(|n| format!("l.{n}"))
            .chain(other.state_names.iter().map(|n| format!("r.{n}")))
            .collect();
        Lts::new(alphabet, names, trans, self.initial).expect("union of valid systems")
    }

    /// Re-expresses the system over a larger alphabet.
    pub fn with_alphabet(&self, alphabet: Arc<Alphabet>) -> Result<Lts, TransysError> {
        let mut trans = Vec::with_capacity(self.transitions.len());
        for &(s, a, t) in &self.transitions {
            let name = self.alphabet.name(a);
            let id = alphabet
                .id(name)
                .ok_or_else(|| TransysError::UnknownAction(name.to_string()))?;
            trans.push((s, id, t));
        }
        Lts::new(alphabet, self.state_names.clone(), trans, self.initial)
    }
}

/// Incremental LTS construction by state and action names.
#[derive(Clone, Debug, Default)]
pub struct LtsBuilder {
    state_names: Vec<String>,
    index: HashMap<String, usize>,
    actions: BTreeSet<String>,
    transitions: Vec<(usize, String, usize)>,
    initial: Option<usize>,
}

impl LtsBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the index of `name`, adding the state if new.
    pub fn state(&mut self, name: &str) -> Result<usize, TransysError> {
        if let Some(&i) = self.index.get(name) {
            return Ok(i);
        }
        if !is_state_name(name) {
            return Err(TransysError::InvalidState(name.to_string()));
        }
        self.state_names.push(name.to_string());
        self.index
            .insert(name.to_string(), self.state_names.len() - 1);
        Ok(self.state_names.len() - 1)
    }

    pub fn action(&mut self, name: &str) -> &mut Self {
        if name != TAU_NAME {
            self.actions.insert(name.to_string());
        }
        self
    }

    pub fn transition(
        &mut self,
        src: &str,
        action: &str,
        dst: &str,
    ) -> Result<&mut Self, TransysError> {
        let s = self.state(src)?;
        let t = self.state(dst)?;
        self.action(action);
        self.transitions.push((s, action.to_string(), t));
        Ok(self)
    }

    pub fn initial(&mut self, name: &str) -> Result<&mut Self, TransysError> {
        self.initial = Some(self.state(name)?);
        Ok(self)
    }

    pub fn build(&self) -> Result<Lts, TransysError> {
        let alphabet = Arc::new(Alphabet::new(&self.actions)?);
        let trans = self
            .transitions
            .iter()
            .map(|(s, a, t)| (*s, alphabet.id(a).expect("registered"), *t))
            .collect();
        let initial = self.initial.ok_or(TransysError::NoInitial)?;
        Lts::new(alphabet, self.state_names.clone(), trans, initial)
    }
}

/// Start offsets of each state's run in a source-sorted transition list.
pub(crate) fn offsets(n: usize, sources: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut start = vec![0usize; n + 1];
    for s in sources {
        start[s + 1] += 1;
    }
    for i in 0..n {
        start[i + 1] += start[i];
    }
    start
}

/// Alphabet after hiding, plus the old-id to new-id map.
pub(crate) fn hidden_alphabet(
    alphabet: &Alphabet,
    keep: &BTreeSet<String>,
) -> Result<(Alphabet, Vec<ActionId>), TransysError> {
    if keep.contains(TAU_NAME) {
        return Err(TransysError::KeepTau);
    }
    let kept = Alphabet::new(alphabet.visible().filter(|a| keep.contains(*a)))?;
    let remap = alphabet
        .ids()
        .map(|a| kept.id(alphabet.name(a)).unwrap_or(TAU))
        .collect();
    Ok((kept, remap))
}
