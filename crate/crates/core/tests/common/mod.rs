//! Oracles shared by the integration tests. Each one is written from the
//! definitions, without calling the code it checks.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;

use fbisim::featurecore::{FeatureModel, GroupKind, Membership, Product};
use fbisim::mucheck::{ActionFormula, MuFormula, RegularFormula};
use fbisim::transys::Lts;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Valid products by trying every subset of features.
pub fn brute_products(fm: &FeatureModel) -> BTreeSet<Product> {
    let fs = fm.features();
    assert!(fs.len() < 24, "brute force over {} features", fs.len());
    let mut out = BTreeSet::new();
    for mask in 0u32..1 << fs.len() {
        let has = |f: &str| {
            let i = fs.iter().position(|g| g == f).expect("declared feature");
            mask >> i & 1 == 1
        };
        let tree_ok = fs.iter().all(|f| {
            if f == fm.root() {
                return has(f);
            }
            let parent = fm.parent_of(f).expect("non-root has a parent");
            let up = !has(f) || has(parent);
            let down = match fm.membership_of(f) {
                Some(Membership::Mandatory) => !has(parent) || has(f),
                _ => true,
            };
            up && down
        });
        let groups_ok = fm.groups().iter().all(|g| {
            if !has(&fs[g.parent]) {
                return true;
            }
            let k = g.members.iter().filter(|&&m| has(&fs[m])).count();
            match g.kind {
                GroupKind::Xor => k == 1,
                GroupKind::Or => k >= 1,
            }
        });
        let constraints_ok = fm
            .constraints()
            .iter()
            .all(|c| c.eval_with(&|f: &str| has(f)));
        let cost: u64 = fs.iter().filter(|f| has(f)).map(|f| fm.cost(f)).sum();
        let cost_ok = fm.max_cost().is_none_or(|m| cost <= m);
        if tree_ok && groups_ok && constraints_ok && cost_ok {
            out.insert(Product::new(
                fs.iter().filter(|f| has(f)).map(String::as_str),
            ));
        }
    }
    out
}

/// `⟦f⟧` on `lts` as a state mask, straight from the semantics: regular
/// modalities through their relations, fixpoints by iteration from the
/// bottom or top of the lattice.
pub fn brute_semantics(lts: &Lts, f: &MuFormula) -> Vec<bool> {
    let mut env = HashMap::new();
    Sem::new(lts).eval(f, &mut env)
}

struct Sem<'a> {
    lts: &'a Lts,
    n: usize,
}

type Rel = Vec<Vec<bool>>;

impl<'a> Sem<'a> {
    fn new(lts: &'a Lts) -> Self {
        Sem {
            lts,
            n: lts.num_states(),
        }
    }

    fn action_holds(af: &ActionFormula, name: Option<&str>) -> bool {
        match af {
            ActionFormula::True => true,
            ActionFormula::Lit(a) => name == Some(a.as_str()),
            ActionFormula::Not(a) => !Self::action_holds(a, name),
            ActionFormula::And(a, b) => Self::action_holds(a, name) && Self::action_holds(b, name),
            ActionFormula::Or(a, b) => Self::action_holds(a, name) || Self::action_holds(b, name),
        }
    }

    fn relation(&self, r: &RegularFormula) -> Rel {
        let n = self.n;
        match r {
            RegularFormula::Act(af) => {
                let mut m = vec![vec![false; n]; n];
                for &(s, a, t) in self.lts.transitions() {
                    let name = (!a.is_tau()).then(|| self.lts.alphabet().name(a));
                    if Self::action_holds(af, name) {
                        m[s][t] = true;
                    }
                }
                m
            }
            RegularFormula::Seq(a, b) => {
                let (x, y) = (self.relation(a), self.relation(b));
                let mut m = vec![vec![false; n]; n];
                for i in 0..n {
                    for k in 0..n {
                        if x[i][k] {
                            for j in 0..n {
                                m[i][j] |= y[k][j];
                            }
                        }
                    }
                }
                m
            }
            RegularFormula::Star(a) => {
                let mut m = self.relation(a);
                for (i, row) in m.iter_mut().enumerate() {
                    row[i] = true;
                }
                for k in 0..n {
                    for i in 0..n {
                        if m[i][k] {
                            for j in 0..n {
                                if m[k][j] {
                                    m[i][j] = true;
                                }
                            }
                        }
                    }
                }
                m
            }
        }
    }

    fn eval(&self, f: &MuFormula, env: &mut HashMap<String, Vec<bool>>) -> Vec<bool> {
        let n = self.n;
        match f {
            MuFormula::True => vec![true; n],
            MuFormula::False => vec![false; n],
            MuFormula::Var(x) => env[x].clone(),
            MuFormula::And(a, b) => {
                let (x, y) = (self.eval(a, env), self.eval(b, env));
                x.iter().zip(&y).map(|(p, q)| *p && *q).collect()
            }
            MuFormula::Or(a, b) => {
                let (x, y) = (self.eval(a, env), self.eval(b, env));
                x.iter().zip(&y).map(|(p, q)| *p || *q).collect()
            }
            MuFormula::Box(r, body) | MuFormula::Diamond(r, body) => {
                let rel = self.relation(r);
                let target = self.eval(body, env);
                let is_box = matches!(f, MuFormula::Box(..));
                (0..n)
                    .map(|s| {
                        let mut succ = (0..n).filter(|&t| rel[s][t]);
                        if is_box {
                            succ.all(|t| target[t])
                        } else {
                            succ.any(|t| target[t])
                        }
                    })
                    .collect()
            }
            MuFormula::Mu(x, body) | MuFormula::Nu(x, body) => {
                let start = matches!(f, MuFormula::Nu(..));
                let saved = env.insert(x.clone(), vec![start; n]);
                loop {
                    let next = self.eval(body, env);
                    if next == env[x] {
                        break;
                    }
                    env.insert(x.clone(), next);
                }
                let out = env.remove(x).expect("bound above");
                if let Some(old) = saved {
                    env.insert(x.clone(), old);
                }
                out
            }
        }
    }
}
