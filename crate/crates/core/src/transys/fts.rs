use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, OnceLock};

use super::lts::{hidden_alphabet, offsets};
use super::{is_state_name, ActionId, Alphabet, Lts, TransysError, TAU_NAME};
use crate::featurecore::{Product, ProductSet, Universe};

/// One entry of θ: `src --action|guard--> dst` with a satisfiable guard.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FtsTransition {
    pub src: usize,
    pub action: ActionId,
    pub dst: usize,
    pub guard: ProductSet,
}

/// An action paired with a guard, as occurring on some transition.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeaturedLabel {
    pub action: ActionId,
    pub guard: ProductSet,
}

/// ρ: per state, the products that can reach it from the initial state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachMap {
    rho: Vec<ProductSet>,
}

impl ReachMap {
    pub fn get(&self, s: usize) -> &ProductSet {
        &self.rho[s]
    }

    pub fn as_slice(&self) -> &[ProductSet] {
        &self.rho
    }
}

/// A featured transition system. θ is stored as the sorted list of its
/// nonempty entries, one per `(src, action, dst)` triple.
#[derive(Debug)]
pub struct Fts {
    universe: Arc<Universe>,
    alphabet: Arc<Alphabet>,
    state_names: Vec<String>,
    transitions: Vec<FtsTransition>,
    out_start: Vec<usize>,
    initial: usize,
    reach: OnceLock<ReachMap>,
}

impl Clone for Fts {
    fn clone(&self) -> Self {
        Fts {
            universe: self.universe.clone(),
            alphabet: self.alphabet.clone(),
            state_names: self.state_names.clone(),
            transitions: self.transitions.clone(),
            out_start: self.out_start.clone(),
            initial: self.initial,
            reach: self.reach.clone(),
        }
    }
}

impl PartialEq for Fts {
    fn eq(&self, other: &Self) -> bool {
        self.universe == other.universe
            && self.alphabet == other.alphabet
            && self.state_names == other.state_names
            && self.transitions == other.transitions
            && self.initial == other.initial
    }
}

impl Eq for Fts {}

impl Fts {
    /// Builds from raw parts. Entries with the same triple are merged by
    /// union; empty guards are dropped with a warning.
    pub fn new(
        universe: Arc<Universe>,
        alphabet: Arc<Alphabet>,
        state_names: Vec<String>,
        transitions: Vec<FtsTransition>,
        initial: usize,
    ) -> Result<Self, TransysError> {
        let n = state_names.len();
        if n == 0 {
            return Err(TransysError::NoStates);
        }
        if initial >= n {
            return Err(TransysError::StateOutOfRange(initial));
        }
        let mut merged: BTreeMap<(usize, ActionId, usize), ProductSet> = BTreeMap::new();
        for t in transitions {
            if t.src >= n || t.dst >= n {
                return Err(TransysError::StateOutOfRange(t.src.max(t.dst)));
            }
            if t.action.index() >= alphabet.len() {
                return Err(TransysError::UnknownAction(format!("#{}", t.action.0)));
            }
            if t.guard.universe_len() != universe.len() {
                return Err(TransysError::UniverseMismatch);
            }
            merged
                .entry((t.src, t.action, t.dst))
                .and_modify(|g| g.union_with(&t.guard))
                .or_insert(t.guard);
        }
        let mut out = Vec::with_capacity(merged.len());
        for ((src, action, dst), guard) in merged {
            if guard.is_empty() {
                log::warn!(
                    "dropping unsatisfiable guard on {} --{}--> {}",
                    state_names[src],
                    alphabet.name(action),
                    state_names[dst]
                );
                continue;
            }
            out.push(FtsTransition {
                src,
                action,
                dst,
                guard,
            });
        }
        let out_start = offsets(n, out.iter().map(|t| t.src));
        Ok(Fts {
            universe,
            alphabet,
            state_names,
            transitions: out,
            out_start,
            initial,
            reach: OnceLock::new(),
        })
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
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

    pub fn transitions(&self) -> &[FtsTransition] {
        &self.transitions
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn outgoing(&self, s: usize) -> &[FtsTransition] {
        &self.transitions[self.out_start[s]..self.out_start[s + 1]]
    }

    /// θ(s, a, t), or `None` for false.
    pub fn guard(&self, s: usize, a: ActionId, t: usize) -> Option<&ProductSet> {
        self.outgoing(s)
            .iter()
            .find(|tr| tr.action == a && tr.dst == t)
            .map(|tr| &tr.guard)
    }

    /// ρ, computed once and cached.
    pub fn reachability(&self) -> &ReachMap {
        self.reach.get_or_init(|| {
            let n = self.num_states();
            let mut rho = vec![self.universe.empty(); n];
            rho[self.initial] = self.universe.full();
            let mut queued = vec![false; n];
            let mut work = vec![self.initial];
            queued[self.initial] = true;
            while let Some(s) = work.pop() {
                queued[s] = false;
                let from = rho[s].clone();
                for t in self.outgoing(s) {
                    if rho[t.dst].union_with_intersection(&from, &t.guard) && !queued[t.dst] {
                        queued[t.dst] = true;
                        work.push(t.dst);
                    }
                }
            }
            ReachMap { rho }
        })
    }

    /// Removes states no product reaches and strengthens every guard with
    /// ρ of its source. Returns the new system and, for each new state,
    /// its index in `self`.
    pub fn preprocess(&self) -> (Fts, Vec<usize>) {
        let rho = self.reachability();
        let old: Vec<usize> = (0..self.num_states())
            .filter(|&s| !rho.get(s).is_empty())
            .collect();
        let mut new_of = vec![usize::MAX; self.num_states()];
        for (i, &o) in old.iter().enumerate() {
            new_of[o] = i;
        }
        let trans = self
            .transitions
            .iter()
            .filter(|t| new_of[t.src] != usize::MAX && new_of[t.dst] != usize::MAX)
            .filter_map(|t| {
                let guard = t.guard.intersection(rho.get(t.src));
                (!guard.is_empty()).then(|| FtsTransition {
                    src: new_of[t.src],
                    action: t.action,
                    dst: new_of[t.dst],
                    guard,
                })
            })
            .collect();
        let names = old.iter().map(|&o| self.state_names[o].clone()).collect();
        let fts = Fts::new(
            self.universe.clone(),
            self.alphabet.clone(),
            names,
            trans,
            new_of[self.initial],
        )
        .expect("preprocessing keeps a valid system");
        (fts, old)
    }

    /// Distinct `(action, guard)` pairs, sorted.
    pub fn featured_labels(&self) -> Vec<FeaturedLabel> {
        let set: BTreeSet<FeaturedLabel> = self
            .transitions
            .iter()
            .map(|t| FeaturedLabel {
                action: t.action,
                guard: t.guard.clone(),
            })
            .collect();
        set.into_iter().collect()
    }

    /// The LTS of one product, given by its index in the universe.
    pub fn project_index(&self, p: usize) -> Lts {
        let trans = self
            .transitions
            .iter()
            .filter(|t| t.guard.contains(p))
            .map(|t| (t.src, t.action, t.dst))
            .collect();
        Lts::new(
            self.alphabet.clone(),
            self.state_names.clone(),
            trans,
            self.initial,
        )
        .expect("projection of a valid system")
    }

    pub fn project(&self, product: &Product) -> Result<Lts, TransysError> {
        let p = self
            .universe
            .index_of(product)
            .ok_or_else(|| TransysError::UnknownProduct(product.to_string()))?;
        Ok(self.project_index(p))
    }

    /// The LTS obtained by forgetting all guards.
    pub fn erase_guards(&self) -> Lts {
        let trans = self
            .transitions
            .iter()
            .map(|t| (t.src, t.action, t.dst))
            .collect();
        Lts::new(
            self.alphabet.clone(),
            self.state_names.clone(),
            trans,
            self.initial,
        )
        .expect("valid system")
    }

    /// Relabels every action outside `keep` as τ, merging guards of
    /// transitions that coincide afterwards.
    pub fn hide(&self, keep: &BTreeSet<String>) -> Result<Fts, TransysError> {
        let (alphabet, remap) = hidden_alphabet(&self.alphabet, keep)?;
        let trans = self
            .transitions
            .iter()
            .map(|t| FtsTransition {
                action: remap[t.action.index()],
                ..t.clone()
            })
            .collect();
        Fts::new(
            self.universe.clone(),
            Arc::new(alphabet),
            self.state_names.clone(),
            trans,
            self.initial,
        )
    }

    /// Pure interleaving. State `(l, r)` has index `l * right.num_states() + r`
    /// and name `l.r`.
    pub fn compose(&self, right: &Fts) -> Result<Fts, TransysError> {
        if *self.universe != *right.universe {
            return Err(TransysError::UniverseMismatch);
        }
        let alphabet = Arc::new(self.alphabet.union(&right.alphabet));
        let lmap: Vec<ActionId> = self
            .alphabet
            .ids()
            .map(|a| alphabet.id(self.alphabet.name(a)).expect("in union"))
            .collect();
        let rmap: Vec<ActionId> = right
            .alphabet
            .ids()
            .map(|a| alphabet.id(right.alphabet.name(a)).expect("in union"))
            .collect();
        let nr = right.num_states();
        let mut names = Vec::with_capacity(self.num_states() * nr);
        for l in &self.state_names {
            for r in &right.state_names {
                names.push(format!("{l}.{r}"));
            }
        }
        let mut trans = Vec::new();
        for t in &self.transitions {
            for r in 0..nr {
                trans.push(FtsTransition {
                    src: t.src * nr + r,
                    action: lmap[t.action.index()],
                    dst: t.dst * nr + r,
                    guard: t.guard.clone(),
                });
            }
        }
        for l in 0..self.num_states() {
            for t in &right.transitions {
                trans.push(FtsTransition {
                    src: l * nr + t.src,
                    action: rmap[t.action.index()],
                    dst: l * nr + t.dst,
                    guard: t.guard.clone(),
                });
            }
        }
        Fts::new(
            self.universe.clone(),
            alphabet,
            names,
            trans,
            self.initial * nr + right.initial,
        )
    }

    /// Same system with renamed states.
    pub fn with_state_names(&self, names: Vec<String>) -> Result<Fts, TransysError> {
        if names.len() != self.num_states() {
            return Err(TransysError::StateOutOfRange(names.len()));
        }
        Fts::new(
            self.universe.clone(),
            self.alphabet.clone(),
            names,
            self.transitions.clone(),
            self.initial,
        )
    }
}

/// Incremental FTS construction by state and action names.
#[derive(Clone, Debug)]
pub struct FtsBuilder {
    universe: Arc<Universe>,
    state_names: Vec<String>,
    index: HashMap<String, usize>,
    actions: BTreeSet<String>,
    transitions: Vec<(usize, String, usize, ProductSet)>,
    initial: Option<usize>,
}

impl FtsBuilder {
    pub fn new(universe: Arc<Universe>) -> Self {
        FtsBuilder {
            universe,
            state_names: Vec::new(),
            index: HashMap::new(),
            actions: BTreeSet::new(),
            transitions: Vec::new(),
            initial: None,
        }
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    /// Declares a new state; fails on duplicates.
    pub fn add_state(&mut self, name: &str) -> Result<usize, TransysError> {
        if self.index.contains_key(name) {
            return Err(TransysError::DuplicateState(name.to_string()));
        }
        self.state(name)
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

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn action(&mut self, name: &str) -> Result<&mut Self, TransysError> {
        if name != TAU_NAME {
            if !crate::featurecore::is_identifier(name) {
                return Err(TransysError::InvalidAction(name.to_string()));
            }
            self.actions.insert(name.to_string());
        }
        Ok(self)
    }

    pub fn transition(
        &mut self,
        src: &str,
        action: &str,
        dst: &str,
        guard: ProductSet,
    ) -> Result<&mut Self, TransysError> {
        if guard.universe_len() != self.universe.len() {
            return Err(TransysError::UniverseMismatch);
        }
        let s = self.state(src)?;
        let t = self.state(dst)?;
        self.action(action)?;
        self.transitions.push((s, action.to_string(), t, guard));
        Ok(self)
    }

    pub fn initial(&mut self, name: &str) -> Result<&mut Self, TransysError> {
        self.initial = Some(self.state(name)?);
        Ok(self)
    }

    pub fn build(&self) -> Result<Fts, TransysError> {
        let alphabet = Arc::new(Alphabet::new(&self.actions)?);
        let trans = self
            .transitions
            .iter()
            .map(|(s, a, t, g)| FtsTransition {
                src: *s,
                action: alphabet.id(a).expect("registered"),
                dst: *t,
                guard: g.clone(),
            })
            .collect();
        let initial = self.initial.ok_or(TransysError::NoInitial)?;
        Fts::new(
            self.universe.clone(),
            alphabet,
            self.state_names.clone(),
            trans,
            initial,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featurecore::FeatureExpr;

    fn universe_f() -> Arc<Universe> {
        Universe::power_set(vec!["f".into()]).unwrap()
    }

    /// s1 -τ-> s2, s2 -a|f-> s3, s1 -a|!f-> s4
    fn fig4_s() -> Fts {
        let u = universe_f();
        let f = u.denote(&FeatureExpr::atom("f")).unwrap();
        let nf = f.complement();
        let mut b = FtsBuilder::new(u.clone());
        for s in ["s1", "s2", "s3", "s4"] {
            b.add_state(s).unwrap();
        }
        b.transition("s1", "tau", "s2", u.full()).unwrap();
        b.transition("s2", "a", "s3", f).unwrap();
        b.transition("s1", "a", "s4", nf).unwrap();
        b.initial("s1").unwrap();
        b.build().unwrap()
    }

    #[test]
    fn reachability_on_fig4() {
        let s = fig4_s();
        let u = s.universe().clone();
        let rho = s.reachability();
        assert!(rho.get(0).is_full());
        assert!(rho.get(1).is_full());
        assert_eq!(
            *rho.get(3),
            u.denote(&FeatureExpr::atom("f")).unwrap().complement()
        );
    }

    #[test]
    fn featured_labels_of_fig4() {
        let s = fig4_s();
        let labels = s.featured_labels();
        assert_eq!(labels.len(), 3);
        assert_eq!(labels.iter().filter(|l| l.action.is_tau()).count(), 1);
    }

    #[test]
    fn guards_merge_and_empty_ones_drop() {
        let u = universe_f();
        let f = u.denote(&FeatureExpr::atom("f")).unwrap();
        let mut b = FtsBuilder::new(u.clone());
        b.transition("x", "a", "y", f.clone()).unwrap();
        b.transition("x", "a", "y", f.clone()).unwrap();
        b.transition("x", "b", "z", u.empty()).unwrap();
        b.initial("x").unwrap();
        let m = b.build().unwrap();
        assert_eq!(m.num_transitions(), 1);
        assert_eq!(m.featured_labels().len(), 1);
        let (p, old) = m.preprocess();
        assert_eq!(p.num_states(), 2);
        assert_eq!(old, vec![0, 1]);
    }

    #[test]
    fn compose_with_unit_is_identity_up_to_names() {
        let s = fig4_s();
        let mut b = FtsBuilder::new(s.universe().clone());
        b.state("e").unwrap();
        b.initial("e").unwrap();
        let unit = b.build().unwrap();
        let c = s.compose(&unit).unwrap();
        assert_eq!(c.num_states(), 4);
        assert_eq!(c.transitions(), s.transitions());
    }

    #[test]
    fn projection_filters_by_product() {
        let s = fig4_s();
        let with_f = s.project(&Product::new(["f"])).unwrap();
        assert_eq!(with_f.num_transitions(), 2);
        let without = s.project(&Product::default()).unwrap();
        assert_eq!(without.num_transitions(), 2);
        assert!(s.project(&Product::new(["g"])).is_err());
    }
}
