use std::collections::BTreeSet;

use super::formula::{MuFormula, RegularFormula};

/// Rewrites regular modalities into fixpoints so that every box and
/// diamond carries a single action formula:
///
/// ```text
/// [R1.R2]φ  =  [R1][R2]φ        <R1.R2>φ  =  <R1><R2>φ
/// [R*]φ     =  nu X.(φ && [R]X)  <R*>φ     =  mu X.(φ || <R>X)
/// ```
///
/// Each star gets its own variable, distinct from every name in the input.
pub fn desugar(formula: &MuFormula) -> MuFormula {
    let mut d = Desugar {
        used: formula.var_names(),
        next: 0,
    };
    d.formula(formula)
}

/// True when no modality carries `.` or `*`.
pub fn is_core(formula: &MuFormula) -> bool {
    match formula {
        MuFormula::True | MuFormula::False | MuFormula::Var(_) => true,
        MuFormula::And(a, b) | MuFormula::Or(a, b) => is_core(a) && is_core(b),
        MuFormula::Box(r, f) | MuFormula::Diamond(r, f) => !r.is_regular() && is_core(f),
        MuFormula::Mu(_, f) | MuFormula::Nu(_, f) => is_core(f),
    }
}

struct Desugar {
    used: BTreeSet<String>,
    next: usize,
}

impl Desugar {
    fn fresh(&mut self) -> String {
        loop {
            let x = format!("X{}", self.next);
            self.next += 1;
            if self.used.insert(x.clone()) {
                return x;
            }
        }
    }

    fn formula(&mut self, f: &MuFormula) -> MuFormula {
        match f {
            MuFormula::True | MuFormula::False | MuFormula::Var(_) => f.clone(),
            MuFormula::And(a, b) => MuFormula::and(self.formula(a), self.formula(b)),
            MuFormula::Or(a, b) => MuFormula::or(self.formula(a), self.formula(b)),
            MuFormula::Mu(x, body) => MuFormula::mu(x.clone(), self.formula(body)),
            MuFormula::Nu(x, body) => MuFormula::nu(x.clone(), self.formula(body)),
            MuFormula::Box(r, body) => {
                let body = self.formula(body);
                self.modality(r, body, true)
            }
            MuFormula::Diamond(r, body) => {
                let body = self.formula(body);
                self.modality(r, body, false)
            }
        }
    }

    /// `[r]body` or `<r>body` where `body` is already core.
    fn modality(&mut self, r: &RegularFormula, body: MuFormula, is_box: bool) -> MuFormula {
        match r {
            RegularFormula::Act(_) if is_box => MuFormula::boxed(r.clone(), body),
            RegularFormula::Act(_) => MuFormula::diamond(r.clone(), body),
            RegularFormula::Seq(r1, r2) => {
                let inner = self.modality(r2, body, is_box);
                self.modality(r1, inner, is_box)
            }
            RegularFormula::Star(r1) => {
                let x = self.fresh();
                let step = self.modality(r1, MuFormula::var(x.clone()), is_box);
                if is_box {
                    MuFormula::nu(x, MuFormula::and(body, step))
                } else {
                    MuFormula::mu(x, MuFormula::or(body, step))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelio::parse_property;

    fn ds(text: &str) -> String {
        let f = parse_property(text).unwrap();
        let d = desugar(&f);
        assert!(is_core(&d));
        assert!(d.free_vars().is_empty());
        d.to_string()
    }

    #[test]
    fn plain_modality_unchanged() {
        assert_eq!(ds("[a || b]false"), "[a || b]false");
        assert_eq!(ds("mu X.<a>X || <b>true"), "mu X.<a>X || <b>true");
    }

    #[test]
    fn star_rule() {
        assert_eq!(ds("[true*]<true>true"), "nu X0.<true>true && [true]X0");
        assert_eq!(ds("<a*>true"), "mu X0.true || <a>X0");
    }

    #[test]
    fn sequence_then_star() {
        assert_eq!(ds("[true*.coffee]false"), "nu X0.[coffee]false && [true]X0");
        assert_eq!(ds("<a.b.c>true"), "<a><b><c>true");
    }

    #[test]
    fn fresh_names_avoid_existing_ones() {
        let out = ds("[true*](nu X0.[a]X0 && mu X1.<b*>X1)");
        assert!(out.contains("X2") && out.contains("X3"), "{out}");
    }

    #[test]
    fn nested_stars_get_distinct_variables() {
        assert_eq!(ds("[(a*)*]false"), "nu X0.false && (nu X1.X0 && [a]X1)");
    }
}
