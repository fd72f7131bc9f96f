use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use super::{is_identifier, FeatureError, FeatureExpr};

/// A product: the set of features it includes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Product {
    features: BTreeSet<String>,
}

impl Product {
    pub fn new<I, S>(features: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Product {
            features: features.into_iter().map(Into::into).collect(),
        }
    }

    pub fn contains(&self, feature: &str) -> bool {
        self.features.contains(feature)
    }

    pub fn features(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

impl fmt::Display for Product {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, name) in self.features.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{name}")?;
        }
        write!(f, "}}")
    }
}

/// The declared feature set together with the finite set of valid products.
///
/// Products are stored in sorted order; a product's position is its bit
/// index in every [`ProductSet`] over this universe.
#[derive(Debug, PartialEq, Eq)]
pub struct Universe {
    features: Vec<String>,
    products: Vec<Product>,
    index: HashMap<Product, usize>,
}

/// Largest feature count accepted by [`Universe::power_set`].
pub const MAX_POWER_SET_FEATURES: usize = 20;

impl Universe {
    /// Builds a universe. `features` keeps its declaration order, which is
    /// the order used by [`Universe::product_to_expr`].
    pub fn new(features: Vec<String>, products: Vec<Product>) -> Result<Arc<Self>, FeatureError> {
        let mut seen = BTreeSet::new();
        for f in &features {
            if !is_identifier(f) {
                return Err(FeatureError::InvalidName(f.clone()));
            }
            if !seen.insert(f.as_str()) {
                return Err(FeatureError::DuplicateFeature(f.clone()));
            }
        }
        if products.is_empty() {
            return Err(FeatureError::EmptyUniverse);
        }
        let mut products = products;
        products.sort();
        for w in products.windows(2) {
            if w[0] == w[1] {
                return Err(FeatureError::DuplicateProduct(w[0].to_string()));
            }
        }
        for p in &products {
            if let Some(bad) = p.features().find(|f| !seen.contains(f)) {
                return Err(FeatureError::UndeclaredFeature(bad.to_string()));
            }
        }
        let index = products
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        Ok(Arc::new(Universe {
            features,
            products,
            index,
        }))
    }

    /// The universe of all subsets of `features`.
    pub fn power_set(features: Vec<String>) -> Result<Arc<Self>, FeatureError> {
        let n = features.len();
        if n > MAX_POWER_SET_FEATURES {
            return Err(FeatureError::TooManyFeatures(n));
        }
        let products = (0u32..1 << n)
            .map(|mask| {
                Product::new(
                    (0..n)
                        .filter(|i| mask & (1 << i) != 0)
                        .map(|i| features[i].clone()),
                )
            })
            .collect();
        Universe::new(features, products)
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn has_feature(&self, name: &str) -> bool {
        self.features.iter().any(|f| f == name)
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    pub fn product(&self, i: usize) -> &Product {
        &self.products[i]
    }

    pub fn index_of(&self, p: &Product) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn len(&self) -> usize {
        self.products.len()
    }

    /// Never true: universes are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
    }

    pub fn full(&self) -> ProductSet {
        let mut bits = FixedBitSet::with_capacity(self.len());
        bits.insert_range(..);
        ProductSet { bits }
    }

    pub fn empty(&self) -> ProductSet {
        ProductSet {
            bits: FixedBitSet::with_capacity(self.len()),
        }
    }

    pub fn singleton(&self, i: usize) -> ProductSet {
        let mut s = self.empty();
        s.bits.insert(i);
        s
    }

    /// Rejects expressions with undeclared atoms.
    pub fn check_expr(&self, expr: &FeatureExpr) -> Result<(), FeatureError> {
        match expr.atoms().into_iter().find(|a| !self.has_feature(a)) {
            Some(bad) => Err(FeatureError::UndeclaredFeature(bad.to_string())),
            None => Ok(()),
        }
    }

    /// `P ⊨ expr`.
    pub fn eval(&self, expr: &FeatureExpr, product: &Product) -> Result<bool, FeatureError> {
        self.check_expr(expr)?;
        Ok(expr.eval_with(&|f| product.contains(f)))
    }

    /// The set of products satisfying `expr`.
    pub fn denote(&self, expr: &FeatureExpr) -> Result<ProductSet, FeatureError> {
        self.check_expr(expr)?;
        let mut set = self.empty();
        for (i, p) in self.products.iter().enumerate() {
            if expr.eval_with(&|f| p.contains(f)) {
                set.bits.insert(i);
            }
        }
        Ok(set)
    }

    /// Characteristic formula: the conjunction of all features of `product`
    /// and the negations of all other declared features.
    pub fn product_to_expr(&self, product: &Product) -> FeatureExpr {
        FeatureExpr::conjunction(self.features.iter().map(|f| {
            if product.contains(f) {
                FeatureExpr::atom(f.clone())
            } else {
                FeatureExpr::not(FeatureExpr::atom(f.clone()))
            }
        }))
    }

    /// A compact expression denoting exactly `set` within this universe.
    ///
    /// Builds a DNF of cubes: each cube starts from one uncovered member's
    /// characteristic literals and drops literals while the cube still
    /// selects only members of `set`. Products outside the universe are
    /// don't-cares.
    pub fn describe(&self, set: &ProductSet) -> FeatureExpr {
        if set.is_empty() {
            return FeatureExpr::False;
        }
        if set.count() == self.len() {
            return FeatureExpr::True;
        }
        let nf = self.features.len();
        let masks: Vec<Vec<bool>> = self
            .products
            .iter()
            .map(|p| self.features.iter().map(|f| p.contains(f)).collect())
            .collect();
        let selects = |cube: &[Option<bool>], i: usize| {
            cube.iter()
                .zip(&masks[i])
                .all(|(lit, v)| lit.map_or(true, |want| want == *v))
        };
        let mut uncovered = set.clone();
        let mut cubes = Vec::new();
        loop {
            let Some(seed) = uncovered.ones().next() else {
                break;
            };
            let mut cube: Vec<Option<bool>> = masks[seed].iter().map(|&v| Some(v)).collect();
            for k in 0..nf {
                let saved = cube[k];
                cube[k] = None;
                let ok = (0..self.len()).all(|i| !selects(&cube, i) || set.contains(i));
                if !ok {
                    cube[k] = saved;
                }
            }
            for i in 0..self.len() {
                if selects(&cube, i) {
                    uncovered.remove(i);
                }
            }
            cubes.push(cube);
        }
        FeatureExpr::disjunction(cubes.into_iter().map(|cube| {
            FeatureExpr::conjunction(cube.into_iter().enumerate().filter_map(|(k, lit)| {
                lit.map(|want| {
                    let a = FeatureExpr::atom(self.features[k].clone());
                    if want {
                        a
                    } else {
                        FeatureExpr::not(a)
                    }
                })
            }))
        }))
    }
}

/// A subset of a universe's products; the canonical form of a feature
/// expression modulo equivalence over that universe.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProductSet {
    bits: FixedBitSet,
}

impl ProductSet {
    pub fn universe_len(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits.contains(i)
    }

    pub fn insert(&mut self, i: usize) {
        self.bits.insert(i);
    }

    pub fn remove(&mut self, i: usize) {
        self.bits.set(i, false);
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn is_full(&self) -> bool {
        self.bits.count_ones(..) == self.bits.len()
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn union_with(&mut self, other: &ProductSet) {
        debug_assert_eq!(self.bits.len(), other.bits.len());
        self.bits.union_with(&other.bits);
    }

    pub fn intersect_with(&mut self, other: &ProductSet) {
        debug_assert_eq!(self.bits.len(), other.bits.len());
        self.bits.intersect_with(&other.bits);
    }

    pub fn difference_with(&mut self, other: &ProductSet) {
        debug_assert_eq!(self.bits.len(), other.bits.len());
        self.bits.difference_with(&other.bits);
    }

    pub fn union(&self, other: &ProductSet) -> ProductSet {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn intersection(&self, other: &ProductSet) -> ProductSet {
        let mut out = self.clone();
        out.intersect_with(other);
        out
    }

    pub fn difference(&self, other: &ProductSet) -> ProductSet {
        let mut out = self.clone();
        out.difference_with(other);
        out
    }

    pub fn complement(&self) -> ProductSet {
        let mut out = self.clone();
        out.bits.toggle_range(..);
        out
    }

    pub fn is_subset(&self, other: &ProductSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn intersects(&self, other: &ProductSet) -> bool {
        !self.bits.is_disjoint(&other.bits)
    }

    /// `(self ∩ mask) ⊆ other` without allocating.
    pub fn intersection_is_subset(&self, mask: &ProductSet, other: &ProductSet) -> bool {
        self.bits
            .as_slice()
            .iter()
            .zip(mask.bits.as_slice())
            .zip(other.bits.as_slice())
            .all(|((a, m), o)| a & m & !o == 0)
    }

    /// Adds `a ∩ b` to `self`; returns whether `self` grew.
    pub fn union_with_intersection(&mut self, a: &ProductSet, b: &ProductSet) -> bool {
        let mut grew = false;
        let (a, b) = (a.bits.as_slice(), b.bits.as_slice());
        for (i, dst) in self.bits.as_mut_slice().iter_mut().enumerate() {
            let next = *dst | (a[i] & b[i]);
            if next != *dst {
                grew = true;
                *dst = next;
            }
        }
        grew
    }

    fn same_universe(&self, other: &ProductSet) -> Result<(), FeatureError> {
        if self.bits.len() == other.bits.len() {
            Ok(())
        } else {
            Err(FeatureError::UniverseMismatch {
                left: self.bits.len(),
                right: other.bits.len(),
            })
        }
    }

    /// Every product of `self` is in `other`.
    pub fn entails(&self, other: &ProductSet) -> Result<bool, FeatureError> {
        self.same_universe(other)?;
        Ok(self.is_subset(other))
    }

    pub fn equivalent(&self, other: &ProductSet) -> Result<bool, FeatureError> {
        self.same_universe(other)?;
        Ok(self == other)
    }

    pub fn satisfiable(&self) -> bool {
        !self.is_empty()
    }
}

/// Orders by the sorted list of member indices.
impl Ord for ProductSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bits
            .len()
            .cmp(&other.bits.len())
            .then_with(|| self.bits.ones().cmp(other.bits.ones()))
    }
}

impl PartialOrd for ProductSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn atom(s: &str) -> FeatureExpr {
        FeatureExpr::atom(s)
    }

    #[test]
    fn eval_basics() {
        let u = Universe::power_set(names(&["f", "f1", "f2"])).unwrap();
        let pf = Product::new(["f"]);
        assert!(u.eval(&atom("f"), &pf).unwrap());
        assert!(!u.eval(&FeatureExpr::not(atom("f")), &pf).unwrap());
        let p1 = Product::new(["f1"]);
        let e = FeatureExpr::and(atom("f1"), FeatureExpr::not(atom("f2")));
        assert!(u.eval(&e, &p1).unwrap());
    }

    #[test]
    fn eval_rejects_undeclared_atom() {
        let u = Universe::power_set(names(&["f"])).unwrap();
        let err = u.eval(&atom("g"), &Product::default()).unwrap_err();
        assert_eq!(err, FeatureError::UndeclaredFeature("g".into()));
    }

    #[test]
    fn denote_top_and_tautology() {
        let u = Universe::power_set(names(&["f", "g"])).unwrap();
        assert!(u.denote(&FeatureExpr::True).unwrap().is_full());
        assert!(u.denote(&FeatureExpr::False).unwrap().is_empty());
        let taut = FeatureExpr::or(atom("f"), FeatureExpr::not(atom("f")));
        assert_eq!(u.denote(&taut).unwrap(), u.full());
    }

    #[test]
    fn entailment_and_satisfiability() {
        let u = Universe::power_set(names(&["f"])).unwrap();
        let x = u.denote(&atom("f")).unwrap();
        assert!(u.empty().entails(&x).unwrap());
        assert!(x.equivalent(&x).unwrap());
        let contra = FeatureExpr::and(atom("f"), FeatureExpr::not(atom("f")));
        assert!(!u.denote(&contra).unwrap().satisfiable());
        let other = Universe::power_set(names(&["f", "g"])).unwrap();
        assert!(matches!(
            x.entails(&other.full()),
            Err(FeatureError::UniverseMismatch { left: 2, right: 4 })
        ));
    }

    #[test]
    fn characteristic_formula() {
        let u = Universe::power_set(names(&["f"])).unwrap();
        assert_eq!(u.product_to_expr(&Product::new(["f"])).to_string(), "f");
        let u = Universe::power_set(names(&["f", "g"])).unwrap();
        assert_eq!(
            u.product_to_expr(&Product::new(["f"])).to_string(),
            "f & !g"
        );
        assert_eq!(
            u.product_to_expr(&Product::default()).to_string(),
            "!f & !g"
        );
    }

    #[test]
    fn products_are_sorted_lexicographically() {
        let u = Universe::power_set(names(&["b", "a"])).unwrap();
        let shown: Vec<String> = u.products().iter().map(|p| p.to_string()).collect();
        assert_eq!(shown, vec!["{}", "{a}", "{a,b}", "{b}"]);
    }

    #[test]
    fn universe_validation() {
        assert_eq!(
            Universe::new(names(&["f"]), vec![]).unwrap_err(),
            FeatureError::EmptyUniverse
        );
        assert!(matches!(
            Universe::new(
                names(&["f"]),
                vec![Product::new(["f"]), Product::new(["f"])]
            ),
            Err(FeatureError::DuplicateProduct(_))
        ));
        assert!(matches!(
            Universe::new(names(&["1f"]), vec![Product::default()]),
            Err(FeatureError::InvalidName(_))
        ));
        assert!(matches!(
            Universe::new(names(&["f", "f"]), vec![Product::default()]),
            Err(FeatureError::DuplicateFeature(_))
        ));
    }

    #[test]
    fn describe_uses_dont_cares() {
        // with only {a} and {b} valid, one literal pins the first product
        let u = Universe::new(
            names(&["a", "b"]),
            vec![Product::new(["a"]), Product::new(["b"])],
        )
        .unwrap();
        let s = u.denote(&atom("a")).unwrap();
        assert_eq!(u.describe(&s).to_string(), "!b");
        assert_eq!(u.describe(&u.full()), FeatureExpr::True);
        assert_eq!(u.describe(&u.empty()), FeatureExpr::False);
    }

    #[test]
    fn masked_subset_helpers() {
        let u = Universe::power_set(names(&["f", "g"])).unwrap();
        let f = u.denote(&atom("f")).unwrap();
        let g = u.denote(&atom("g")).unwrap();
        let fg = f.intersection(&g);
        assert!(f.intersection_is_subset(&g, &fg));
        assert!(!f.intersection_is_subset(&u.full(), &g));
        let mut acc = u.empty();
        assert!(acc.union_with_intersection(&f, &g));
        assert!(!acc.union_with_intersection(&f, &g));
        assert_eq!(acc, fg);
    }
}
