use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{is_identifier, FeatureError, FeatureExpr, Product};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    /// Exactly one member.
    Xor,
    /// At least one member.
    Or,
}

/// How a non-root feature hangs below its parent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Mandatory,
    Optional,
    /// Member of the group with this index.
    Group(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    pub parent: usize,
    pub kind: GroupKind,
    pub members: Vec<usize>,
}

/// An attributed feature model: a feature tree with groups, cross-tree
/// constraints, per-feature costs and an optional total cost bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureModel {
    features: Vec<String>,
    parent: Vec<Option<usize>>,
    membership: Vec<Option<Membership>>,
    groups: Vec<Group>,
    constraints: Vec<FeatureExpr>,
    costs: BTreeMap<String, u64>,
    max_cost: Option<u64>,
}

impl FeatureModel {
    pub fn root(&self) -> &str {
        &self.features[0]
    }

    /// Features in declaration order, root first.
    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn parent_of(&self, feature: &str) -> Option<&str> {
        let i = self.position(feature)?;
        self.parent[i].map(|p| self.features[p].as_str())
    }

    pub fn membership_of(&self, feature: &str) -> Option<Membership> {
        self.membership[self.position(feature)?]
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn constraints(&self) -> &[FeatureExpr] {
        &self.constraints
    }

    pub fn costs(&self) -> &BTreeMap<String, u64> {
        &self.costs
    }

    pub fn cost(&self, feature: &str) -> u64 {
        self.costs.get(feature).copied().unwrap_or(0)
    }

    pub fn max_cost(&self) -> Option<u64> {
        self.max_cost
    }

    fn position(&self, feature: &str) -> Option<usize> {
        self.features.iter().position(|f| f == feature)
    }

    /// Mandatory and optional children of `parent` (group members excluded),
    /// in declaration order.
    pub fn solitary_children(&self, parent: &str) -> Vec<(&str, Membership)> {
        let Some(p) = self.position(parent) else {
            return Vec::new();
        };
        (0..self.features.len())
            .filter(|&i| self.parent[i] == Some(p))
            .filter_map(|i| match self.membership[i] {
                Some(m @ (Membership::Mandatory | Membership::Optional)) => {
                    Some((self.features[i].as_str(), m))
                }
                _ => None,
            })
            .collect()
    }

    /// Sum of the costs of the product's features.
    pub fn product_cost(&self, product: &Product) -> u64 {
        product.features().map(|f| self.cost(f)).sum()
    }

    /// All valid products, sorted and duplicate-free.
    pub fn enumerate_products(&self) -> Vec<Product> {
        let n = self.features.len();
        // decision items in tree order so parents are decided first
        let mut queue = std::collections::VecDeque::from([0usize]);
        let mut seen_groups = BTreeSet::new();
        enum Item {
            Solitary(usize, bool),
            Group(usize),
        }
        let mut items = Vec::new();
        while let Some(f) = queue.pop_front() {
            for c in 0..n {
                if self.parent[c] != Some(f) {
                    continue;
                }
                match self.membership[c] {
                    Some(Membership::Mandatory) => items.push(Item::Solitary(c, true)),
                    Some(Membership::Optional) => items.push(Item::Solitary(c, false)),
                    Some(Membership::Group(g)) => {
                        if seen_groups.insert(g) {
                            items.push(Item::Group(g));
                        }
                    }
                    None => {}
                }
                queue.push_back(c);
            }
        }

        let mut selected = vec![false; n];
        selected[0] = true;
        let mut out = BTreeSet::new();
        fn visit(
            fm: &FeatureModel,
            items: &[Item],
            k: usize,
            selected: &mut Vec<bool>,
            out: &mut BTreeSet<Product>,
        ) {
            if k == items.len() {
                let product = Product::new(
                    (0..selected.len())
                        .filter(|&i| selected[i])
                        .map(|i| fm.features[i].clone()),
                );
                if fm.admits(&product) {
                    out.insert(product);
                }
                return;
            }
            match items[k] {
                Item::Solitary(c, mandatory) => {
                    let parent_on = selected[fm.parent[c].expect("non-root")];
                    if !parent_on {
                        selected[c] = false;
                        visit(fm, items, k + 1, selected, out);
                    } else if mandatory {
                        selected[c] = true;
                        visit(fm, items, k + 1, selected, out);
                    } else {
                        for on in [false, true] {
                            selected[c] = on;
                            visit(fm, items, k + 1, selected, out);
                        }
                        selected[c] = false;
                    }
                }
                Item::Group(g) => {
                    let group = &fm.groups[g];
                    let members = &group.members;
                    if !selected[group.parent] {
                        for &m in members {
                            selected[m] = false;
                        }
                        visit(fm, items, k + 1, selected, out);
                        return;
                    }
                    let m = members.len();
                    for mask in 1u64..(1 << m) {
                        if group.kind == GroupKind::Xor && mask.count_ones() != 1 {
                            continue;
                        }
                        for (j, &f) in members.iter().enumerate() {
                            selected[f] = mask & (1 << j) != 0;
                        }
                        visit(fm, items, k + 1, selected, out);
                    }
                    for &f in members {
                        selected[f] = false;
                    }
                }
            }
        }
        visit(self, &items, 0, &mut selected, &mut out);
        out.into_iter().collect()
    }

    /// Cross-tree constraints and the cost bound. Tree structure is
    /// guaranteed by the enumeration itself.
    fn admits(&self, product: &Product) -> bool {
        self.constraints
            .iter()
            .all(|c| c.eval_with(&|f| product.contains(f)))
            && self
                .max_cost
                .map_or(true, |m| self.product_cost(product) <= m)
    }
}

/// Incremental construction of a [`FeatureModel`]; all checks happen in
/// [`FeatureModelBuilder::build`].
#[derive(Clone, Debug, Default)]
pub struct FeatureModelBuilder {
    root: Option<String>,
    edges: Vec<(String, String, bool)>,
    groups: Vec<(String, GroupKind, Vec<String>)>,
    constraints: Vec<FeatureExpr>,
    costs: Vec<(String, u64)>,
    max_cost: Option<u64>,
}

impl FeatureModelBuilder {
    pub fn new(root: impl Into<String>) -> Self {
        FeatureModelBuilder {
            root: Some(root.into()),
            ..Default::default()
        }
    }

    pub fn mandatory(mut self, parent: &str, child: &str) -> Self {
        self.edges.push((parent.into(), child.into(), true));
        self
    }

    pub fn optional(mut self, parent: &str, child: &str) -> Self {
        self.edges.push((parent.into(), child.into(), false));
        self
    }

    pub fn group(mut self, parent: &str, kind: GroupKind, members: &[&str]) -> Self {
        self.groups.push((
            parent.into(),
            kind,
            members.iter().map(|s| s.to_string()).collect(),
        ));
        self
    }

    pub fn constraint(mut self, expr: FeatureExpr) -> Self {
        self.constraints.push(expr);
        self
    }

    pub fn cost(mut self, feature: &str, cost: u64) -> Self {
        self.costs.push((feature.into(), cost));
        self
    }

    pub fn max_cost(mut self, bound: u64) -> Self {
        self.max_cost = Some(bound);
        self
    }

    pub fn build(self) -> Result<FeatureModel, FeatureError> {
        let root = self
            .root
            .ok_or_else(|| FeatureError::Model("missing root".into()))?;
        let mut features = vec![root.clone()];
        let mut index: HashMap<String, usize> = HashMap::from([(root.clone(), 0)]);
        let mut intern = |name: &str, features: &mut Vec<String>| -> Result<usize, FeatureError> {
            if !is_identifier(name) {
                return Err(FeatureError::InvalidName(name.into()));
            }
            Ok(*index.entry(name.to_string()).or_insert_with(|| {
                features.push(name.to_string());
                features.len() - 1
            }))
        };
        if !is_identifier(&root) {
            return Err(FeatureError::InvalidName(root));
        }

        let mut links: Vec<(usize, usize, Membership)> = Vec::new();
        for (parent, child, mandatory) in &self.edges {
            let p = intern(parent, &mut features)?;
            let c = intern(child, &mut features)?;
            let m = if *mandatory {
                Membership::Mandatory
            } else {
                Membership::Optional
            };
            links.push((p, c, m));
        }
        let mut groups = Vec::new();
        for (g, (parent, kind, members)) in self.groups.iter().enumerate() {
            if members.is_empty() {
                return Err(FeatureError::Model(format!("empty group under `{parent}`")));
            }
            let p = intern(parent, &mut features)?;
            let mut ids = Vec::new();
            for m in members {
                let c = intern(m, &mut features)?;
                links.push((p, c, Membership::Group(g)));
                ids.push(c);
            }
            groups.push(Group {
                parent: p,
                kind: *kind,
                members: ids,
            });
        }

        let n = features.len();
        let mut parent = vec![None; n];
        let mut membership = vec![None; n];
        for (p, c, m) in links {
            if c == 0 {
                return Err(FeatureError::Model(format!(
                    "root `{}` cannot have a parent",
                    features[0]
                )));
            }
            if p == c || parent[c].is_some() {
                return Err(FeatureError::Model(format!(
                    "feature `{}` has more than one parent",
                    features[c]
                )));
            }
            parent[c] = Some(p);
            membership[c] = Some(m);
        }
        for start in 1..n {
            let mut cur = start;
            let mut steps = 0;
            while let Some(p) = parent[cur] {
                cur = p;
                steps += 1;
                if steps > n {
                    return Err(FeatureError::Model(format!(
                        "cycle in feature tree through `{}`",
                        features[start]
                    )));
                }
            }
            if cur != 0 {
                return Err(FeatureError::Model(format!(
                    "feature `{}` is not connected to the root",
                    features[start]
                )));
            }
        }

        for c in &self.constraints {
            if let Some(bad) = c.atoms().into_iter().find(|a| !index.contains_key(*a)) {
                return Err(FeatureError::UndeclaredFeature(bad.to_string()));
            }
        }
        let mut costs = BTreeMap::new();
        for (f, c) in self.costs {
            if !index.contains_key(&f) {
                return Err(FeatureError::UndeclaredFeature(f));
            }
            costs.insert(f, c);
        }
        if features.len() > 63 {
            return Err(FeatureError::TooManyFeatures(features.len()));
        }
        Ok(FeatureModel {
            features,
            parent,
            membership,
            groups,
            constraints: self.constraints,
            costs,
            max_cost: self.max_cost,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lone_root_has_one_product() {
        let fm = FeatureModelBuilder::new("r").build().unwrap();
        assert_eq!(fm.enumerate_products(), vec![Product::new(["r"])]);
    }

    #[test]
    fn one_optional_child_gives_two_products() {
        let fm = FeatureModelBuilder::new("r")
            .optional("r", "a")
            .build()
            .unwrap();
        assert_eq!(fm.enumerate_products().len(), 2);
    }

    #[test]
    fn groups_and_constraints() {
        let fm = FeatureModelBuilder::new("r")
            .group("r", GroupKind::Xor, &["a", "b"])
            .optional("r", "c")
            .group("c", GroupKind::Or, &["d", "e"])
            .constraint(FeatureExpr::implies(
                FeatureExpr::atom("a"),
                FeatureExpr::atom("c"),
            ))
            .build()
            .unwrap();
        // xor: 2 choices; c off (1) or on with 3 or-choices; a forces c
        // a: 3; b: 4
        assert_eq!(fm.enumerate_products().len(), 7);
    }

    #[test]
    fn costs_default_to_zero_and_bound_applies() {
        let fm = FeatureModelBuilder::new("r")
            .optional("r", "x")
            .optional("r", "y")
            .cost("x", 10)
            .cost("y", 3)
            .max_cost(12)
            .build()
            .unwrap();
        assert_eq!(fm.product_cost(&Product::new(["r", "x"])), 10);
        assert_eq!(fm.cost("r"), 0);
        assert_eq!(fm.enumerate_products().len(), 3);
    }

    #[test]
    fn structural_errors() {
        let cyclic = FeatureModelBuilder::new("r")
            .mandatory("a", "b")
            .mandatory("b", "a")
            .build();
        assert!(matches!(cyclic, Err(FeatureError::Model(_))));
        let two_parents = FeatureModelBuilder::new("r")
            .mandatory("r", "a")
            .optional("r", "b")
            .mandatory("b", "a")
            .build();
        assert!(matches!(two_parents, Err(FeatureError::Model(_))));
        let unknown = FeatureModelBuilder::new("r")
            .constraint(FeatureExpr::atom("zz"))
            .build();
        assert_eq!(
            unknown.unwrap_err(),
            FeatureError::UndeclaredFeature("zz".into())
        );
    }
}
