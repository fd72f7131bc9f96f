use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use super::eval::{evaluate, relevant_actions, MuError};
use super::formula::MuFormula;
use crate::featurecore::Product;
use crate::ftsmin::{minimize_with, FtsMinError, MinimizeOptions};
use crate::ltsmin::minimize_lts;
use crate::modelio::ModelError;
use crate::transys::{Fts, TransysError};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Transys(#[from] TransysError),
    #[error(transparent)]
    FtsMin(#[from] FtsMinError),
    #[error(transparent)]
    Mu(#[from] MuError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pipeline {
    /// Project each product, then check its LTS.
    Products,
    /// Work on the FTS, projecting only at the end.
    Family,
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pipeline::Products => "products",
            Pipeline::Family => "family",
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub use_bisim: bool,
    /// Actions left visible when reducing. `None` means the formula's
    /// literals, or the whole alphabet if it names none.
    pub keep: Option<BTreeSet<String>>,
    pub minimize: MinimizeOptions,
}

impl VerifyOptions {
    pub fn bisim(use_bisim: bool) -> Self {
        VerifyOptions {
            use_bisim,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ModelSize {
    pub states: usize,
    pub transitions: usize,
}

impl ModelSize {
    fn of_fts(f: &Fts) -> Self {
        ModelSize {
            states: f.num_states(),
            transitions: f.num_transitions(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub pipeline: Pipeline,
    pub use_bisim: bool,
    /// Visible actions after hiding; empty without reduction.
    pub keep: BTreeSet<String>,
    /// One verdict per requested product, in request order.
    pub verdicts: Vec<(Product, bool)>,
    pub aggregate: bool,
    /// The input FTS.
    pub before: ModelSize,
    /// The reduced FTS in family mode; the largest reduced product LTS in
    /// product mode. Equal to `before` without reduction.
    pub after: ModelSize,
    pub millis: f64,
}

impl VerificationReport {
    pub fn count_true(&self) -> usize {
        self.verdicts.iter().filter(|(_, v)| *v).count()
    }

    /// One `key=value` line.
    pub fn record(&self, name: &str, show_time: bool) -> String {
        let mut s = format!(
            "property={name} mode={} bisim={} products={} true={} false={} aggregate={} states={} transitions={} reduced_states={} reduced_transitions={}",
            self.pipeline,
            self.use_bisim,
            self.verdicts.len(),
            self.count_true(),
            self.verdicts.len() - self.count_true(),
            verdict(self.aggregate),
            self.before.states,
            self.before.transitions,
            self.after.states,
            self.after.transitions,
        );
        if show_time {
            let _ = write!(s, " millis={:.1}", self.millis);
        }
        s
    }
}

pub(crate) fn verdict(b: bool) -> &'static str {
    if b {
        "TRUE"
    } else {
        "FALSE"
    }
}

/// The actions kept visible for `formula`.
pub fn keep_set(
    fts: &Fts,
    formula: &MuFormula,
    over: Option<&BTreeSet<String>>,
) -> BTreeSet<String> {
    if let Some(k) = over {
        return k.clone();
    }
    let lits = relevant_actions(formula);
    if lits.is_empty() {
        fts.alphabet().visible().map(str::to_string).collect()
    } else {
        lits
    }
}

/// Every product index of the FTS's universe.
pub fn all_products(fts: &Fts) -> Vec<usize> {
    (0..fts.universe().len()).collect()
}

/// Checks each product's LTS, optionally hiding the actions outside the
/// keep set and minimizing modulo branching bisimulation first.
pub fn verify_products(
    fts: &Fts,
    products: &[usize],
    formula: &MuFormula,
    opts: &VerifyOptions,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let keep = if opts.use_bisim {
        keep_set(fts, formula, opts.keep.as_ref())
    } else {
        BTreeSet::new()
    };
    let results: Vec<(bool, ModelSize)> = products
        .par_iter()
        .map(|&p| {
            let mut lts = fts.project_index(p);
            if opts.use_bisim {
                lts = minimize_lts(&lts.restrict_reachable().0.hide(&keep)?);
            }
            let size = ModelSize {
                states: lts.num_states(),
                transitions: lts.num_transitions(),
            };
            Ok((evaluate(&lts, formula)?.holds, size))
        })
        .collect::<Result<_, VerifyError>>()?;
    let before = ModelSize::of_fts(fts);
    let after = if opts.use_bisim {
        ModelSize {
            states: results.iter().map(|r| r.1.states).max().unwrap_or(0),
            transitions: results.iter().map(|r| r.1.transitions).max().unwrap_or(0),
        }
    } else {
        before
    };
    Ok(report(
        fts,
        Pipeline::Products,
        opts.use_bisim,
        keep,
        products,
        results.into_iter().map(|r| r.0),
        before,
        after,
        start,
    ))
}

/// Checks the projections of the FTS, optionally hiding and minimizing
/// the whole family once beforehand.
pub fn verify_family(
    fts: &Fts,
    products: &[usize],
    formula: &MuFormula,
    opts: &VerifyOptions,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let (model, keep) = if opts.use_bisim {
        let keep = keep_set(fts, formula, opts.keep.as_ref());
        (minimize_with(&fts.hide(&keep)?, &opts.minimize)?.fts, keep)
    } else {
        (fts.clone(), BTreeSet::new())
    };
    let verdicts: Vec<bool> = products
        .par_iter()
        .map(|&p| Ok(evaluate(&model.project_index(p), formula)?.holds))
        .collect::<Result<_, VerifyError>>()?;
    let before = ModelSize::of_fts(fts);
    let after = ModelSize::of_fts(&model);
    Ok(report(
        fts,
        Pipeline::Family,
        opts.use_bisim,
        keep,
        products,
        verdicts.into_iter(),
        before,
        after,
        start,
    ))
}

/// Dispatches on `pipeline`.
pub fn verify(
    fts: &Fts,
    products: &[usize],
    formula: &MuFormula,
    pipeline: Pipeline,
    opts: &VerifyOptions,
) -> Result<VerificationReport, VerifyError> {
    match pipeline {
        Pipeline::Products => verify_products(fts, products, formula, opts),
        Pipeline::Family => verify_family(fts, products, formula, opts),
    }
}

#[allow(clippy::too_many_arguments)]
fn report(
    fts: &Fts,
    pipeline: Pipeline,
    use_bisim: bool,
    keep: BTreeSet<String>,
    products: &[usize],
    verdicts: impl Iterator<Item = bool>,
    before: ModelSize,
    after: ModelSize,
    start: Instant,
) -> VerificationReport {
    let verdicts: Vec<(Product, bool)> = products
        .iter()
        .zip(verdicts)
        .map(|(&p, v)| (fts.universe().product(p).clone(), v))
        .collect();
    VerificationReport {
        pipeline,
        use_bisim,
        keep,
        aggregate: verdicts.iter().all(|(_, v)| *v),
        verdicts,
        before,
        after,
        millis: start.elapsed().as_secs_f64() * 1000.0,
    }
}

/// A human-readable table with one line per named report.
pub fn render_reports(rows: &[(String, VerificationReport)], show_time: bool) -> String {
    let width = rows
        .iter()
        .map(|(n, _)| n.len())
        .max()
        .unwrap_or(0)
        .max("property".len());
    let mut out = format!(
        "{:<width$}  {:<8}  {:<5}  {:>7}  {:>7}  {:>13}  result",
        "property", "mode", "bisim", "true", "false", "reduced"
    );
    if show_time {
        out.push_str("  millis");
    }
    out.push('\n');
    for (name, r) in rows {
        let _ = write!(
            out,
            "{:<width$}  {:<8}  {:<5}  {:>7}  {:>7}  {:>13}  {:<6}",
            name,
            r.pipeline.to_string(),
            if r.use_bisim { "yes" } else { "no" },
            r.count_true(),
            r.verdicts.len() - r.count_true(),
            format!("{}/{}", r.after.states, r.after.transitions),
            verdict(r.aggregate),
        );
        if show_time {
            let _ = write!(out, "  {:.1}", r.millis);
        }
        out.truncate(out.trim_end().len());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelio::{parse_fts, parse_property};

    /// Product {f} loops on τ after `a`; product {} reaches `b`.
    const LOOPY: &str = "features f
states s0 s1 s2
init s0
trans s0 -> s1 : a
trans s1 -> s1 : c [f]
trans s1 -> s2 : b
";

    fn run(text: &str, pipeline: Pipeline, use_bisim: bool) -> VerificationReport {
        let fts = parse_fts(LOOPY).unwrap();
        let f = parse_property(text).unwrap();
        verify(
            &fts,
            &all_products(&fts),
            &f,
            pipeline,
            &VerifyOptions::bisim(use_bisim),
        )
        .unwrap()
    }

    #[test]
    fn hiding_removes_divergence() {
        for pipeline in [Pipeline::Products, Pipeline::Family] {
            let plain = run("[a](mu X.[!b]X)", pipeline, false);
            assert!(!plain.aggregate);
            assert_eq!(plain.count_true(), 1);
            let reduced = run("[a](mu X.[!b]X)", pipeline, true);
            assert!(reduced.aggregate, "{pipeline}");
            assert_eq!(
                reduced.keep,
                BTreeSet::from(["a".to_string(), "b".to_string()])
            );
        }
    }

    #[test]
    fn literal_free_formula_keeps_everything() {
        let fts = parse_fts(LOOPY).unwrap();
        let f = parse_property("[true*]<true>true").unwrap();
        assert_eq!(keep_set(&fts, &f, None).len(), 3);
        let over = BTreeSet::from(["c".to_string()]);
        assert_eq!(keep_set(&fts, &f, Some(&over)), over);
    }

    #[test]
    fn true_holds_everywhere() {
        for pipeline in [Pipeline::Products, Pipeline::Family] {
            for b in [false, true] {
                let r = run("true", pipeline, b);
                assert!(r.aggregate);
                assert_eq!(r.verdicts.len(), 2);
            }
        }
    }

    #[test]
    fn record_and_table() {
        let r = run("<a>true", Pipeline::Family, false);
        assert_eq!(
            r.record("p", false),
            "property=p mode=family bisim=false products=2 true=2 false=0 aggregate=TRUE states=3 transitions=3 reduced_states=3 reduced_transitions=3"
        );
        assert!(r.record("p", true).contains(" millis="));
        let t = render_reports(&[("p".into(), r)], false);
        assert_eq!(t.lines().count(), 2);
        assert!(t.lines().nth(1).unwrap().ends_with("TRUE"));
    }
}
