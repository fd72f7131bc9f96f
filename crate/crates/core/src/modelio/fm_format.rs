use std::fmt::Write as _;
use std::path::Path;

use super::guard;
use super::lexer::{tokenize, Cursor};
use super::{ModelError, SourceSpan};
use crate::featurecore::{FeatureModel, FeatureModelBuilder, GroupKind, Membership};

/// Parses the line-oriented feature model format:
///
/// ```text
/// root M
/// mandatory M O BC
/// optional M R
/// xor O E D
/// or S CS PS TS
/// constraint P -> R
/// cost R 5
/// maxcost 35
/// ```
pub fn parse_feature_model(text: &str) -> Result<FeatureModel, ModelError> {
    parse_feature_model_in("<input>", text)
}

pub fn load_feature_model(path: &Path) -> Result<FeatureModel, ModelError> {
    let text = super::read(path)?;
    parse_feature_model_in(&path.display().to_string(), &text)
}

pub fn parse_feature_model_in(file: &str, text: &str) -> Result<FeatureModel, ModelError> {
    let mut builder: Option<FeatureModelBuilder> = None;
    let mut first_span: Option<SourceSpan> = None;
    let mut max_seen = false;
    for (ln, line) in text.split('\n').enumerate() {
        let ln = ln + 1;
        let toks = tokenize(file, line, ln, 1, false)?;
        if toks.is_empty() {
            continue;
        }
        let mut c = Cursor::new(file, &toks, (ln, line.chars().count() + 1));
        let kw_span = c.span();
        first_span.get_or_insert_with(|| kw_span.clone());
        let kw = c.ident("a keyword")?;
        if kw == "root" {
            if builder.is_some() {
                return Err(ModelError::syntax(kw_span, "duplicate `root` line"));
            }
            builder = Some(FeatureModelBuilder::new(c.ident("a feature name")?));
            c.finish()?;
            continue;
        }
        let b = builder
            .take()
            .ok_or_else(|| ModelError::syntax(kw_span.clone(), "expected `root` first"))?;
        let next = match kw.as_str() {
            "mandatory" | "optional" => {
                let parent = c.ident("a parent feature")?;
                let mut b = b;
                let mut any = false;
                while !c.at_end() {
                    let child = c.ident("a child feature")?;
                    b = if kw == "mandatory" {
                        b.mandatory(&parent, &child)
                    } else {
                        b.optional(&parent, &child)
                    };
                    any = true;
                }
                if !any {
                    return Err(c.error("expected at least one child feature"));
                }
                b
            }
            "xor" | "or" => {
                let parent = c.ident("a parent feature")?;
                let mut members = Vec::new();
                while !c.at_end() {
                    members.push(c.ident("a group member")?);
                }
                if members.is_empty() {
                    return Err(c.error("expected group members"));
                }
                let refs: Vec<&str> = members.iter().map(String::as_str).collect();
                let kind = if kw == "xor" {
                    GroupKind::Xor
                } else {
                    GroupKind::Or
                };
                b.group(&parent, kind, &refs)
            }
            "constraint" => {
                let e = guard::expr(&mut c)?;
                b.constraint(e)
            }
            "cost" => {
                let f = c.ident("a feature name")?;
                let n = number(&mut c)?;
                b.cost(&f, n)
            }
            "maxcost" => {
                if max_seen {
                    return Err(ModelError::syntax(kw_span, "duplicate `maxcost` line"));
                }
                max_seen = true;
                let n = number(&mut c)?;
                b.max_cost(n)
            }
            other => {
                return Err(ModelError::syntax(
                    kw_span,
                    format!("unknown keyword `{other}`"),
                ))
            }
        };
        c.finish()?;
        builder = Some(next);
    }
    let span = first_span.unwrap_or_else(|| SourceSpan::new(file, 1, 1));
    builder
        .ok_or_else(|| ModelError::syntax(span.clone(), "missing `root` line"))?
        .build()
        .map_err(|e| ModelError::syntax(span, e.to_string()))
}

fn number(c: &mut Cursor) -> Result<u64, ModelError> {
    let span = c.span();
    let w = c.ident("a number")?;
    w.parse().map_err(|_| {
        ModelError::syntax(span, format!("expected a nonnegative integer, found `{w}`"))
    })
}

pub fn serialize_feature_model(fm: &FeatureModel) -> String {
    let mut out = format!("root {}\n", fm.root());
    let names = fm.features();
    let mut groups_done = vec![false; fm.groups().len()];
    for name in &names[1..] {
        let parent = fm.parent_of(name).expect("non-root has a parent");
        match fm.membership_of(name).expect("non-root has a membership") {
            Membership::Mandatory => {
                let _ = writeln!(out, "mandatory {parent} {name}");
            }
            Membership::Optional => {
                let _ = writeln!(out, "optional {parent} {name}");
            }
            Membership::Group(g) => {
                if !groups_done[g] {
                    groups_done[g] = true;
                    let group = &fm.groups()[g];
                    let kw = match group.kind {
                        GroupKind::Xor => "xor",
                        GroupKind::Or => "or",
                    };
                    let members: Vec<&str> =
                        group.members.iter().map(|&m| names[m].as_str()).collect();
                    let _ = writeln!(out, "{kw} {parent} {}", members.join(" "));
                }
            }
        }
    }
    for c in fm.constraints() {
        let _ = writeln!(out, "constraint {c}");
    }
    for (f, c) in fm.costs() {
        let _ = writeln!(out, "cost {f} {c}");
    }
    if let Some(m) = fm.max_cost() {
        let _ = writeln!(out, "maxcost {m}");
    }
    out
}
