use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::guard;
use super::lexer::{tokenize, Cursor};
use super::{fm_format, ModelError, SourceSpan};
use crate::featurecore::{FeatureExpr, FeatureModel, Product, Universe};
use crate::transys::{Alphabet, Fts, FtsTransition};

/// A parsed `.fts` file.
#[derive(Clone, Debug)]
pub struct FtsDocument {
    pub fts: Fts,
    /// The `featuremodel` reference, if the product set came from one.
    pub feature_model_path: Option<String>,
    pub feature_model: Option<FeatureModel>,
}

struct RawTrans {
    span: SourceSpan,
    src: (String, SourceSpan),
    dst: (String, SourceSpan),
    action: String,
    guard: Option<(FeatureExpr, SourceSpan)>,
}

/// Parses an `.fts` text that does not reference a feature model file.
pub fn parse_fts(text: &str) -> Result<Fts, ModelError> {
    let mut no_loader = |path: &str, span: SourceSpan| -> Result<FeatureModel, ModelError> {
        Err(ModelError::syntax(
            span,
            format!("cannot resolve feature model `{path}` without a base directory"),
        ))
    };
    Ok(parse_fts_with("<input>", text, &mut no_loader)?.fts)
}

/// Reads an `.fts` file; `featuremodel` paths are resolved relative to it.
pub fn load_fts(path: &Path) -> Result<FtsDocument, ModelError> {
    let text = super::read(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut loader = |rel: &str, _span: SourceSpan| fm_format::load_feature_model(&base.join(rel));
    parse_fts_with(&path.display().to_string(), &text, &mut loader)
}

/// Parses an `.fts` text, resolving `featuremodel` lines with `load_fm`.
pub fn parse_fts_with(
    file: &str,
    text: &str,
    load_fm: &mut dyn FnMut(&str, SourceSpan) -> Result<FeatureModel, ModelError>,
) -> Result<FtsDocument, ModelError> {
    let mut features: Option<(Vec<String>, SourceSpan)> = None;
    let mut products: Option<Vec<Product>> = None;
    let mut fm: Option<(String, FeatureModel, SourceSpan)> = None;
    let mut actions: Vec<String> = Vec::new();
    let mut states: Vec<String> = Vec::new();
    let mut state_index: HashMap<String, usize> = HashMap::new();
    let mut init: Option<(String, SourceSpan)> = None;
    let mut trans: Vec<RawTrans> = Vec::new();

    for (ln, line) in text.split('\n').enumerate() {
        let ln = ln + 1;
        let trimmed = line.trim_start();
        if trimmed.split_whitespace().next() == Some("featuremodel") {
            let col = line.len() - trimmed.len() + 1;
            let kw_span = SourceSpan::new(file, ln, col);
            if fm.is_some() {
                return Err(ModelError::syntax(kw_span, "duplicate `featuremodel` line"));
            }
            let rest = trimmed["featuremodel".len()..]
                .split(['#', '%'])
                .next()
                .unwrap_or("");
            let path = rest.trim();
            if path.is_empty() {
                return Err(ModelError::syntax(kw_span, "expected a path"));
            }
            let span = SourceSpan::new(
                file,
                ln,
                col + "featuremodel".len() + rest.len() - rest.trim_start().len(),
            );
            let model = load_fm(path, span.clone())?;
            fm = Some((path.to_string(), model, span));
            continue;
        }
        let toks = tokenize(file, line, ln, 1, true)?;
        if toks.is_empty() {
            continue;
        }
        let mut c = Cursor::new(file, &toks, (ln, line.chars().count() + 1));
        let kw_span = c.span();
        let kw = c.ident("a keyword")?;
        match kw.as_str() {
            "features" => {
                if features.is_some() {
                    return Err(ModelError::syntax(kw_span, "duplicate `features` line"));
                }
                let mut names = Vec::new();
                while !c.at_end() {
                    let span = c.span();
                    let name = c.ident("a feature name")?;
                    if !crate::featurecore::is_identifier(&name) {
                        return Err(ModelError::syntax(
                            span,
                            format!("invalid feature name `{name}`"),
                        ));
                    }
                    if names.contains(&name) {
                        return Err(ModelError::syntax(
                            span,
                            format!("duplicate feature `{name}`"),
                        ));
                    }
                    names.push(name);
                }
                features = Some((names, kw_span));
            }
            "products" => {
                let list = products.get_or_insert_with(Vec::new);
                loop {
                    c.expect("{")?;
                    let mut fs = Vec::new();
                    if !c.eat("}") {
                        loop {
                            fs.push(c.ident("a feature name")?);
                            if c.eat("}") {
                                break;
                            }
                            c.expect(",")?;
                        }
                    }
                    list.push(Product::new(fs));
                    if c.at_end() {
                        break;
                    }
                    c.expect(";")?;
                    if c.at_end() {
                        break;
                    }
                }
            }
            "actions" => {
                while !c.at_end() {
                    let span = c.span();
                    let a = c.ident("an action name")?;
                    if !crate::featurecore::is_identifier(&a) {
                        return Err(ModelError::syntax(
                            span,
                            format!("invalid action name `{a}`"),
                        ));
                    }
                    actions.push(a);
                }
            }
            "states" => {
                while !c.at_end() {
                    let span = c.span();
                    let s = c.ident("a state name")?;
                    if !crate::transys::is_state_name(&s) {
                        return Err(ModelError::syntax(
                            span,
                            format!("invalid state name `{s}`"),
                        ));
                    }
                    if state_index.contains_key(&s) {
                        return Err(ModelError::syntax(span, format!("duplicate state `{s}`")));
                    }
                    state_index.insert(s.clone(), states.len());
                    states.push(s);
                }
            }
            "init" => {
                if init.is_some() {
                    return Err(ModelError::syntax(kw_span, "duplicate `init` line"));
                }
                let span = c.span();
                init = Some((c.ident("a state name")?, span));
            }
            "trans" => {
                let src_span = c.span();
                let src = c.ident("a source state")?;
                c.expect("->")?;
                let dst_span = c.span();
                let dst = c.ident("a target state")?;
                c.expect(":")?;
                let act_span = c.span();
                let action = c.ident("an action")?;
                if action != crate::transys::TAU_NAME && !crate::featurecore::is_identifier(&action)
                {
                    return Err(ModelError::syntax(
                        act_span,
                        format!("invalid action name `{action}`"),
                    ));
                }
                let guard = if c.eat("[") {
                    let span = c.span();
                    let e = guard::expr(&mut c)?;
                    c.expect("]")?;
                    Some((e, span))
                } else {
                    None
                };
                trans.push(RawTrans {
                    span: kw_span,
                    src: (src, src_span),
                    dst: (dst, dst_span),
                    action,
                    guard,
                });
            }
            other => {
                return Err(ModelError::syntax(
                    kw_span,
                    format!("unknown keyword `{other}`"),
                ));
            }
        }
        c.finish()?;
    }

    let end = SourceSpan::new(file, text.split('\n').count().max(1), 1);
    let universe = match (&features, products, &fm) {
        (_, Some(_), Some((_, _, span))) => {
            return Err(ModelError::syntax(
                span.clone(),
                "`products` and `featuremodel` are mutually exclusive",
            ))
        }
        (_, None, Some((_, model, span))) => {
            if let Some((names, fspan)) = &features {
                let mut a = names.clone();
                let mut b = model.features().to_vec();
                a.sort();
                b.sort();
                if a != b {
                    return Err(ModelError::syntax(
                        fspan.clone(),
                        "`features` differs from the feature model's features",
                    ));
                }
            }
            Universe::new(model.features().to_vec(), model.enumerate_products())
                .map_err(|e| ModelError::syntax(span.clone(), e.to_string()))?
        }
        (Some((names, span)), Some(list), None) => Universe::new(names.clone(), list)
            .map_err(|e| ModelError::syntax(span.clone(), e.to_string()))?,
        (Some((names, span)), None, None) => Universe::power_set(names.clone())
            .map_err(|e| ModelError::syntax(span.clone(), e.to_string()))?,
        (None, Some(list), None) => {
            if list.iter().all(Product::is_empty) {
                Universe::new(Vec::new(), list)
                    .map_err(|e| ModelError::syntax(end.clone(), e.to_string()))?
            } else {
                return Err(ModelError::syntax(
                    end,
                    "`products` needs a `features` line",
                ));
            }
        }
        (None, None, None) => Universe::power_set(Vec::new()).expect("empty power set"),
    };

    let alphabet = Alphabet::new(actions.iter().chain(trans.iter().map(|t| &t.action)))
        .map_err(|e| ModelError::syntax(end.clone(), e.to_string()))?;
    let lookup = |(name, span): &(String, SourceSpan)| {
        state_index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::syntax(span.clone(), format!("undeclared state `{name}`")))
    };
    let mut out = Vec::with_capacity(trans.len());
    for t in &trans {
        let guard = match &t.guard {
            None => universe.full(),
            Some((e, span)) => universe
                .denote(e)
                .map_err(|err| ModelError::syntax(span.clone(), err.to_string()))?,
        };
        if guard.is_empty() {
            log::warn!("{}: guard denotes no product; transition dropped", t.span);
        }
        out.push(FtsTransition {
            src: lookup(&t.src)?,
            action: alphabet.id(&t.action).expect("collected"),
            dst: lookup(&t.dst)?,
            guard,
        });
    }
    let (init_name, init_span) =
        init.ok_or_else(|| ModelError::syntax(end.clone(), "missing `init` line"))?;
    let initial = lookup(&(init_name, init_span))?;
    let fts = Fts::new(
        universe,
        std::sync::Arc::new(alphabet),
        states,
        out,
        initial,
    )
    .map_err(|e| ModelError::syntax(end, e.to_string()))?;
    let (feature_model_path, feature_model) = match fm {
        Some((p, m, _)) => (Some(p), Some(m)),
        None => (None, None),
    };
    Ok(FtsDocument {
        fts,
        feature_model_path,
        feature_model,
    })
}

/// Renders `fts` with an explicit `products` list.
pub fn serialize_fts(fts: &Fts) -> String {
    let mut out = String::new();
    let u = fts.universe();
    if u.features().is_empty() {
        out.push_str("features\n");
    } else {
        let _ = writeln!(out, "features {}", u.features().join(" "));
    }
    for p in u.products() {
        let _ = writeln!(out, "products {p}");
    }
    write_body(&mut out, fts);
    out
}

/// Renders `fts` with a `featuremodel` reference instead of a product list.
pub fn serialize_fts_with_model(fts: &Fts, model_path: &str) -> String {
    let mut out = format!("featuremodel {model_path}\n");
    write_body(&mut out, fts);
    out
}

fn write_body(out: &mut String, fts: &Fts) {
    let u = fts.universe();
    if fts.alphabet().len() > 1 {
        let _ = writeln!(out, "actions {}", fts.alphabet());
    }
    let _ = writeln!(out, "states {}", fts.state_names().join(" "));
    let _ = writeln!(out, "init {}", fts.state_name(fts.initial()));
    for t in fts.transitions() {
        let _ = write!(
            out,
            "trans {} -> {} : {}",
            fts.state_name(t.src),
            fts.state_name(t.dst),
            fts.alphabet().name(t.action)
        );
        if !t.guard.is_full() {
            let _ = write!(out, " [{}]", u.describe(&t.guard));
        }
        out.push('\n');
    }
}
