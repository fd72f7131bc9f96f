use std::collections::BTreeSet;
use std::fmt;

/// Boolean expression over feature names.
///
/// Expressions are kept syntactically only for input and output. All
/// reasoning goes through [`ProductSet`](super::ProductSet), the set of
/// products an expression denotes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FeatureExpr {
    True,
    False,
    Atom(String),
    Not(Box<FeatureExpr>),
    And(Box<FeatureExpr>, Box<FeatureExpr>),
    Or(Box<FeatureExpr>, Box<FeatureExpr>),
    Implies(Box<FeatureExpr>, Box<FeatureExpr>),
    Iff(Box<FeatureExpr>, Box<FeatureExpr>),
}

impl FeatureExpr {
    pub fn atom(name: impl Into<String>) -> Self {
        FeatureExpr::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: FeatureExpr) -> Self {
        FeatureExpr::Not(Box::new(e))
    }

    pub fn and(a: FeatureExpr, b: FeatureExpr) -> Self {
        FeatureExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: FeatureExpr, b: FeatureExpr) -> Self {
        FeatureExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: FeatureExpr, b: FeatureExpr) -> Self {
        FeatureExpr::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: FeatureExpr, b: FeatureExpr) -> Self {
        FeatureExpr::Iff(Box::new(a), Box::new(b))
    }

    /// Left-nested conjunction; `True` for an empty iterator.
    pub fn conjunction(items: impl IntoIterator<Item = FeatureExpr>) -> Self {
        items
            .into_iter()
            .reduce(FeatureExpr::and)
            .unwrap_or(FeatureExpr::True)
    }

    /// Left-nested disjunction; `False` for an empty iterator.
    pub fn disjunction(items: impl IntoIterator<Item = FeatureExpr>) -> Self {
        items
            .into_iter()
            .reduce(FeatureExpr::or)
            .unwrap_or(FeatureExpr::False)
    }

    /// All feature names occurring in the expression.
    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            FeatureExpr::True | FeatureExpr::False => {}
            FeatureExpr::Atom(name) => {
                out.insert(name.as_str());
            }
            FeatureExpr::Not(e) => e.collect_atoms(out),
            FeatureExpr::And(a, b)
            | FeatureExpr::Or(a, b)
            | FeatureExpr::Implies(a, b)
            | FeatureExpr::Iff(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Evaluates under the valuation `holds`. Atoms are looked up by name;
    /// callers are responsible for rejecting undeclared atoms beforehand.
    pub fn eval_with(&self, holds: &impl Fn(&str) -> bool) -> bool {
        match self {
            FeatureExpr::True => true,
            FeatureExpr::False => false,
            FeatureExpr::Atom(name) => holds(name),
            FeatureExpr::Not(e) => !e.eval_with(holds),
            FeatureExpr::And(a, b) => a.eval_with(holds) && b.eval_with(holds),
            FeatureExpr::Or(a, b) => a.eval_with(holds) || b.eval_with(holds),
            FeatureExpr::Implies(a, b) => !a.eval_with(holds) || b.eval_with(holds),
            FeatureExpr::Iff(a, b) => a.eval_with(holds) == b.eval_with(holds),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            FeatureExpr::Implies(..) | FeatureExpr::Iff(..) => 0,
            FeatureExpr::Or(..) => 1,
            FeatureExpr::And(..) => 2,
            _ => 3,
        }
    }

    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

/// Renders in the guard grammar accepted by the model parsers
/// (`!`, `&`, `|`, `->`, `<->`).
impl fmt::Display for FeatureExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureExpr::True => write!(f, "true"),
            FeatureExpr::False => write!(f, "false"),
            FeatureExpr::Atom(name) => write!(f, "{name}"),
            FeatureExpr::Not(e) => {
                write!(f, "!")?;
                e.fmt_operand(f, 3)
            }
            FeatureExpr::And(a, b) => {
                a.fmt_operand(f, 2)?;
                write!(f, " & ")?;
                b.fmt_operand(f, 2)
            }
            FeatureExpr::Or(a, b) => {
                a.fmt_operand(f, 1)?;
                write!(f, " | ")?;
                b.fmt_operand(f, 1)
            }
            // implication and equivalence do not chain without parentheses
            FeatureExpr::Implies(a, b) => {
                a.fmt_operand(f, 1)?;
                write!(f, " -> ")?;
                b.fmt_operand(f, 1)
            }
            FeatureExpr::Iff(a, b) => {
                a.fmt_operand(f, 1)?;
                write!(f, " <-> ")?;
                b.fmt_operand(f, 1)
            }
        }
    }
}
