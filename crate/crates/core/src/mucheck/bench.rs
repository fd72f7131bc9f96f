//! The vending-machine case study: both pipelines, with and without
//! reduction, for every property.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use super::verify::{
    all_products, verdict, verify, Pipeline, VerificationReport, VerifyError, VerifyOptions,
};
use crate::ftsmin::MinimizeOptions;
use crate::modelio::{load_fts, load_properties, NamedProperty};
use crate::transys::Fts;

/// Column order of the bench table.
pub const COLUMNS: [(Pipeline, bool); 4] = [
    (Pipeline::Products, false),
    (Pipeline::Products, true),
    (Pipeline::Family, false),
    (Pipeline::Family, true),
];

/// Published verdicts per property, in [`COLUMNS`] order.
pub const EXPECTED: [(&str, [bool; 4]); 12] = [
    ("1", [false, true, false, true]),
    ("2", [true; 4]),
    ("3a", [true; 4]),
    ("3b", [true; 4]),
    ("4a", [true; 4]),
    ("4b", [true; 4]),
    ("5a", [false, true, false, true]),
    ("5b", [false, true, false, true]),
    ("6", [true; 4]),
    ("7a", [true; 4]),
    ("7b", [true; 4]),
    ("8", [true; 4]),
];

/// The composed system and its properties.
#[derive(Clone, Debug)]
pub struct CaseStudy {
    pub fts: Fts,
    pub properties: Vec<NamedProperty>,
}

/// Loads `beverage.fts` and `soup.fts` from `dir`, composes them, and
/// reads every `.mcf` file under `dir/props` in name order.
pub fn load_case_study(dir: &Path) -> Result<CaseStudy, VerifyError> {
    let bev = load_fts(&dir.join("beverage.fts"))?.fts;
    let soup = load_fts(&dir.join("soup.fts"))?.fts;
    let fts = bev.compose(&soup)?;
    let props_dir = dir.join("props");
    let mut files: Vec<_> = std::fs::read_dir(&props_dir)
        .map_err(|source| crate::modelio::ModelError::Io {
            path: props_dir.display().to_string(),
            source,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "mcf"))
        .collect();
    files.sort();
    let mut properties = Vec::new();
    for f in files {
        properties.extend(load_properties(&f)?);
    }
    Ok(CaseStudy { fts, properties })
}

#[derive(Clone, Debug, Default)]
pub struct BenchOptions {
    /// Per-property keep sets, by property name.
    pub keep: BTreeMap<String, BTreeSet<String>>,
    pub minimize: MinimizeOptions,
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub property: String,
    /// One report per entry of [`COLUMNS`].
    pub reports: Vec<VerificationReport>,
}

impl BenchRow {
    pub fn verdicts(&self) -> [bool; 4] {
        std::array::from_fn(|i| self.reports[i].aggregate)
    }
}

/// Runs all four columns for every property over every product.
pub fn run_bench(
    fts: &Fts,
    properties: &[NamedProperty],
    opts: &BenchOptions,
) -> Result<Vec<BenchRow>, VerifyError> {
    let products = all_products(fts);
    properties
        .iter()
        .map(|p| {
            let reports = COLUMNS
                .iter()
                .map(|&(pipeline, use_bisim)| {
                    let vo = VerifyOptions {
                        use_bisim,
                        keep: opts.keep.get(&p.name).cloned(),
                        minimize: opts.minimize,
                    };
                    verify(fts, &products, &p.formula, pipeline, &vo)
                })
                .collect::<Result<_, _>>()?;
            Ok(BenchRow {
                property: p.name.clone(),
                reports,
            })
        })
        .collect()
}

/// The published verdicts for `property`, if it is one of the twelve.
pub fn expected(property: &str) -> Option<[bool; 4]> {
    EXPECTED
        .iter()
        .find(|(n, _)| *n == property)
        .map(|(_, v)| *v)
}

/// A table with one row per property: the four verdicts, then the
/// timings when `show_time` is set.
pub fn render_bench(rows: &[BenchRow], show_time: bool) -> String {
    let width = rows
        .iter()
        .map(|r| r.property.len())
        .max()
        .unwrap_or(0)
        .max("property".len());
    let heads = ["products", "products+bisim", "family", "family+bisim"];
    let mut out = format!("{:<width$}", "property");
    for h in heads {
        let _ = write!(out, "  {h:>14}");
    }
    if show_time {
        for h in heads {
            let _ = write!(out, "  {:>20}", format!("ms {h}"));
        }
    }
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{:<width$}", row.property);
        for r in &row.reports {
            let _ = write!(out, "  {:>14}", verdict(r.aggregate));
        }
        if show_time {
            for r in &row.reports {
                let _ = write!(out, "  {:>20.1}", r.millis);
            }
        }
        out.push('\n');
    }
    out
}

/// `key=value` records, one per property and column.
pub fn bench_records(rows: &[BenchRow], show_time: bool) -> String {
    rows.iter()
        .flat_map(|row| {
            row.reports
                .iter()
                .map(move |r| r.record(&row.property, show_time) + "\n")
        })
        .collect()
}
