use std::collections::BTreeSet;
use std::fmt;

/// Predicate over actions inside a modality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ActionFormula {
    True,
    Lit(String),
    Not(Box<ActionFormula>),
    And(Box<ActionFormula>, Box<ActionFormula>),
    Or(Box<ActionFormula>, Box<ActionFormula>),
}

/// Regular formula over action formulas.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RegularFormula {
    Act(ActionFormula),
    Seq(Box<RegularFormula>, Box<RegularFormula>),
    Star(Box<RegularFormula>),
}

/// Modal mu-calculus formula with regular modalities. There is no
/// formula-level negation, so every fixpoint body is monotone.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MuFormula {
    True,
    False,
    And(Box<MuFormula>, Box<MuFormula>),
    Or(Box<MuFormula>, Box<MuFormula>),
    Box(RegularFormula, Box<MuFormula>),
    Diamond(RegularFormula, Box<MuFormula>),
    Mu(String, Box<MuFormula>),
    Nu(String, Box<MuFormula>),
    Var(String),
}

impl ActionFormula {
    pub fn lit(name: impl Into<String>) -> Self {
        ActionFormula::Lit(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: ActionFormula) -> Self {
        ActionFormula::Not(Box::new(a))
    }

    pub fn and(a: ActionFormula, b: ActionFormula) -> Self {
        ActionFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: ActionFormula, b: ActionFormula) -> Self {
        ActionFormula::Or(Box::new(a), Box::new(b))
    }

    /// Evaluates with `holds` deciding each literal.
    pub fn eval_with(&self, holds: &impl Fn(&str) -> bool) -> bool {
        match self {
            ActionFormula::True => true,
            ActionFormula::Lit(a) => holds(a),
            ActionFormula::Not(a) => !a.eval_with(holds),
            ActionFormula::And(a, b) => a.eval_with(holds) && b.eval_with(holds),
            ActionFormula::Or(a, b) => a.eval_with(holds) || b.eval_with(holds),
        }
    }

    /// Whether a visible action named `action` satisfies the formula.
    pub fn matches_visible(&self, action: &str) -> bool {
        self.eval_with(&|lit| lit == action)
    }

    /// Whether τ satisfies the formula: true iff the formula holds when
    /// every literal is false.
    pub fn matches_tau(&self) -> bool {
        self.eval_with(&|_| false)
    }

    fn collect_literals(&self, out: &mut BTreeSet<String>) {
        match self {
            ActionFormula::True => {}
            ActionFormula::Lit(a) => {
                out.insert(a.clone());
            }
            ActionFormula::Not(a) => a.collect_literals(out),
            ActionFormula::And(a, b) | ActionFormula::Or(a, b) => {
                a.collect_literals(out);
                b.collect_literals(out);
            }
        }
    }

    fn level(&self) -> u8 {
        match self {
            ActionFormula::Or(..) => 0,
            ActionFormula::And(..) => 1,
            _ => 2,
        }
    }
}

impl RegularFormula {
    pub fn act(a: ActionFormula) -> Self {
        RegularFormula::Act(a)
    }

    pub fn seq(a: RegularFormula, b: RegularFormula) -> Self {
        RegularFormula::Seq(Box::new(a), Box::new(b))
    }

    pub fn star(a: RegularFormula) -> Self {
        RegularFormula::Star(Box::new(a))
    }

    fn collect_literals(&self, out: &mut BTreeSet<String>) {
        match self {
            RegularFormula::Act(a) => a.collect_literals(out),
            RegularFormula::Seq(a, b) => {
                a.collect_literals(out);
                b.collect_literals(out);
            }
            RegularFormula::Star(a) => a.collect_literals(out),
        }
    }

    /// True when the formula contains `.` or `*`.
    pub fn is_regular(&self) -> bool {
        !matches!(self, RegularFormula::Act(_))
    }
}

impl MuFormula {
    pub fn and(a: MuFormula, b: MuFormula) -> Self {
        MuFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: MuFormula, b: MuFormula) -> Self {
        MuFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn boxed(r: RegularFormula, f: MuFormula) -> Self {
        MuFormula::Box(r, Box::new(f))
    }

    pub fn diamond(r: RegularFormula, f: MuFormula) -> Self {
        MuFormula::Diamond(r, Box::new(f))
    }

    pub fn mu(x: impl Into<String>, f: MuFormula) -> Self {
        MuFormula::Mu(x.into(), Box::new(f))
    }

    pub fn nu(x: impl Into<String>, f: MuFormula) -> Self {
        MuFormula::Nu(x.into(), Box::new(f))
    }

    pub fn var(x: impl Into<String>) -> Self {
        MuFormula::Var(x.into())
    }

    /// Action names occurring as literals anywhere in the formula.
    pub fn literals(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_literals(&mut out);
        out
    }

    fn collect_literals(&self, out: &mut BTreeSet<String>) {
        match self {
            MuFormula::True | MuFormula::False | MuFormula::Var(_) => {}
            MuFormula::And(a, b) | MuFormula::Or(a, b) => {
                a.collect_literals(out);
                b.collect_literals(out);
            }
            MuFormula::Box(r, f) | MuFormula::Diamond(r, f) => {
                r.collect_literals(out);
                f.collect_literals(out);
            }
            MuFormula::Mu(_, f) | MuFormula::Nu(_, f) => f.collect_literals(out),
        }
    }

    /// Variables occurring free.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            MuFormula::True | MuFormula::False => {}
            MuFormula::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            MuFormula::And(a, b) | MuFormula::Or(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            MuFormula::Box(_, f) | MuFormula::Diamond(_, f) => f.collect_free(bound, out),
            MuFormula::Mu(x, f) | MuFormula::Nu(x, f) => {
                bound.push(x.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable name, bound or free.
    pub fn var_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self {
            MuFormula::True | MuFormula::False => {}
            MuFormula::Var(x) => {
                out.insert(x.clone());
            }
            MuFormula::And(a, b) | MuFormula::Or(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            MuFormula::Box(_, f) | MuFormula::Diamond(_, f) => f.collect_names(out),
            MuFormula::Mu(x, f) | MuFormula::Nu(x, f) => {
                out.insert(x.clone());
                f.collect_names(out);
            }
        }
    }

    /// Number of nested constructors on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            MuFormula::True | MuFormula::False | MuFormula::Var(_) => 1,
            MuFormula::And(a, b) | MuFormula::Or(a, b) => 1 + a.depth().max(b.depth()),
            MuFormula::Box(_, f)
            | MuFormula::Diamond(_, f)
            | MuFormula::Mu(_, f)
            | MuFormula::Nu(_, f) => 1 + f.depth(),
        }
    }

    fn level(&self) -> u8 {
        match self {
            MuFormula::Mu(..) | MuFormula::Nu(..) => 0,
            MuFormula::Or(..) => 1,
            MuFormula::And(..) => 2,
            _ => 3,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.level() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl ActionFormula {
    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.level() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for ActionFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionFormula::True => write!(f, "true"),
            ActionFormula::Lit(a) => write!(f, "{a}"),
            ActionFormula::Not(a) => {
                write!(f, "!")?;
                a.fmt_at(f, 2)
            }
            ActionFormula::And(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, " && ")?;
                b.fmt_at(f, 2)
            }
            ActionFormula::Or(a, b) => {
                a.fmt_at(f, 0)?;
                write!(f, " || ")?;
                b.fmt_at(f, 1)
            }
        }
    }
}

impl fmt::Display for RegularFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegularFormula::Act(a) => write!(f, "{a}"),
            RegularFormula::Seq(a, b) => {
                write!(f, "{a}.")?;
                if matches!(**b, RegularFormula::Seq(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            RegularFormula::Star(a) => match &**a {
                RegularFormula::Act(af)
                    if af.level() == 2 && !matches!(af, ActionFormula::Not(_)) =>
                {
                    write!(f, "{a}*")
                }
                RegularFormula::Star(_) => write!(f, "{a}*"),
                _ => write!(f, "({a})*"),
            },
        }
    }
}

/// Renders in the property syntax accepted by the parser.
impl fmt::Display for MuFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MuFormula::True => write!(f, "true"),
            MuFormula::False => write!(f, "false"),
            MuFormula::Var(x) => write!(f, "{x}"),
            MuFormula::And(a, b) => {
                a.fmt_at(f, 2)?;
                write!(f, " && ")?;
                b.fmt_at(f, 3)
            }
            MuFormula::Or(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, " || ")?;
                b.fmt_at(f, 2)
            }
            MuFormula::Box(r, body) => {
                write!(f, "[{r}]")?;
                body.fmt_at(f, 3)
            }
            MuFormula::Diamond(r, body) => {
                write!(f, "<{r}>")?;
                body.fmt_at(f, 3)
            }
            MuFormula::Mu(x, body) => write!(f, "mu {x}.{body}"),
            MuFormula::Nu(x, body) => write!(f, "nu {x}.{body}"),
        }
    }
}
