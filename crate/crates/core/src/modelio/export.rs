use std::fmt::Write as _;
use std::sync::Arc;

use super::guard;
use super::lexer::{tokenize, Cursor};
use super::{ModelError, SourceSpan};
use crate::featurecore::ProductSet;
use crate::transys::{Alphabet, Fts, Lts, TransysError, TAU_NAME};

/// Aldebaran text: a `des (initial, transitions, states)` header and one
/// `(src,"label",dst)` line per transition.
pub fn export_aut(lts: &Lts) -> String {
    let mut out = format!(
        "des ({}, {}, {})\n",
        lts.initial(),
        lts.num_transitions(),
        lts.num_states()
    );
    for &(s, a, t) in lts.transitions() {
        let _ = writeln!(out, "({s},\"{}\",{t})", lts.alphabet().name(a));
    }
    out
}

/// Reads Aldebaran text. States are named by their numbers; the label
/// `tau` is the silent action.
pub fn parse_aut(file: &str, text: &str) -> Result<Lts, ModelError> {
    let mut lines = text
        .split('\n')
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines
        .next()
        .ok_or_else(|| ModelError::syntax(SourceSpan::new(file, 1, 1), "missing `des` header"))?;
    let hl = hl + 1;
    let nums = header
        .trim()
        .strip_prefix("des")
        .map(str::trim)
        .and_then(|r| r.strip_prefix('('))
        .and_then(|r| r.strip_suffix(')'))
        .map(|r| {
            r.split(',')
                .map(|x| x.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
        });
    let (init, ntrans, nstates) = match nums {
        Some(Ok(v)) if v.len() == 3 => (v[0], v[1], v[2]),
        _ => {
            return Err(ModelError::syntax(
                SourceSpan::new(file, hl, 1),
                "expected `des (initial, transitions, states)`",
            ))
        }
    };
    let mut raw = Vec::with_capacity(ntrans);
    let mut labels = Vec::new();
    for (ln, line) in lines {
        let ln = ln + 1;
        let bad = || {
            ModelError::syntax(
                SourceSpan::new(file, ln, 1),
                "expected `(src,\"label\",dst)`",
            )
        };
        let body = line
            .trim()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let first = body.find(',').ok_or_else(bad)?;
        let last = body.rfind(',').ok_or_else(bad)?;
        if first == last {
            return Err(bad());
        }
        let src: usize = body[..first].trim().parse().map_err(|_| bad())?;
        let dst: usize = body[last + 1..].trim().parse().map_err(|_| bad())?;
        let label = body[first + 1..last].trim();
        let label = label
            .strip_prefix('"')
            .and_then(|l| l.strip_suffix('"'))
            .unwrap_or(label);
        if src >= nstates || dst >= nstates {
            return Err(ModelError::syntax(
                SourceSpan::new(file, ln, 1),
                format!("state out of range (header declares {nstates} states)"),
            ));
        }
        if label != TAU_NAME && !crate::featurecore::is_identifier(label) {
            return Err(ModelError::syntax(
                SourceSpan::new(file, ln, 1),
                format!("unsupported action label `{label}`"),
            ));
        }
        labels.push(label.to_string());
        raw.push((src, label.to_string(), dst));
    }
    if raw.len() != ntrans {
        return Err(ModelError::syntax(
            SourceSpan::new(file, hl, 1),
            format!("header declares {ntrans} transitions, found {}", raw.len()),
        ));
    }
    let alphabet = Arc::new(Alphabet::new(&labels).map_err(|e: TransysError| {
        ModelError::syntax(SourceSpan::new(file, hl, 1), e.to_string())
    })?);
    let trans = raw
        .into_iter()
        .map(|(s, a, t)| (s, alphabet.id(&a).expect("collected"), t))
        .collect();
    Lts::with_numbered_states(alphabet, nstates, trans, init)
        .map_err(|e| ModelError::syntax(SourceSpan::new(file, hl, 1), e.to_string()))
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn export_dot_lts(lts: &Lts) -> String {
    let mut out = String::from("digraph lts {\n");
    for s in 0..lts.num_states() {
        let shape = if s == lts.initial() {
            " [shape=doublecircle]"
        } else {
            ""
        };
        let _ = writeln!(out, "  \"{}\"{shape};", dot_escape(lts.state_name(s)));
    }
    for &(s, a, t) in lts.transitions() {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}\"];",
            dot_escape(lts.state_name(s)),
            dot_escape(lts.state_name(t)),
            lts.alphabet().name(a)
        );
    }
    out.push_str("}\n");
    out
}

/// Edges are labeled `action [guard]`.
pub fn export_dot_fts(fts: &Fts) -> String {
    let mut out = String::from("digraph fts {\n");
    for s in 0..fts.num_states() {
        let shape = if s == fts.initial() {
            " [shape=doublecircle]"
        } else {
            ""
        };
        let _ = writeln!(out, "  \"{}\"{shape};", dot_escape(fts.state_name(s)));
    }
    for t in fts.transitions() {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{} [{}]\"];",
            dot_escape(fts.state_name(t.src)),
            dot_escape(fts.state_name(t.dst)),
            fts.alphabet().name(t.action),
            dot_escape(&fts.universe().describe(&t.guard).to_string())
        );
    }
    out.push_str("}\n");
    out
}

/// Parses relation lines `s | guard | t`, where `s` names a state of
/// `left` and `t` a state of `right`. The guard is everything between the
/// first and the last `|`.
pub fn parse_relation(
    file: &str,
    text: &str,
    left: &Fts,
    right: &Fts,
) -> Result<Vec<(usize, ProductSet, usize)>, ModelError> {
    let mut out = Vec::new();
    for (ln, line) in text.split('\n').enumerate() {
        let ln = ln + 1;
        let content = line.split(['#', '%']).next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let bad = |col: usize, msg: &str| {
            ModelError::syntax(SourceSpan::new(file, ln, col), msg.to_string())
        };
        let (Some(first), Some(last)) = (content.find('|'), content.rfind('|')) else {
            return Err(bad(1, "expected `state | guard | state`"));
        };
        if first == last {
            return Err(bad(first + 1, "expected a second `|`"));
        }
        let s = content[..first].trim();
        let t = content[last + 1..].trim();
        let si = left
            .state_index(s)
            .ok_or_else(|| bad(1, &format!("unknown left state `{s}`")))?;
        let ti = right
            .state_index(t)
            .ok_or_else(|| bad(last + 2, &format!("unknown right state `{t}`")))?;
        let gtext = &content[first + 1..last];
        let toks = tokenize(file, gtext, ln, first + 2, false)?;
        let mut c = Cursor::new(file, &toks, (ln, last + 1));
        let e = guard::expr(&mut c)?;
        c.finish()?;
        let set = left
            .universe()
            .denote(&e)
            .map_err(|err| bad(first + 2, &err.to_string()))?;
        out.push((si, set, ti));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transys::{lts_isomorphic, LtsBuilder};

    #[test]
    fn aut_of_trivial_lts() {
        let mut b = LtsBuilder::new();
        b.initial("s").unwrap();
        assert_eq!(export_aut(&b.build().unwrap()), "des (0, 0, 1)\n");
    }

    #[test]
    fn aut_round_trip() {
        let mut b = LtsBuilder::new();
        b.transition("0", "a", "1").unwrap();
        b.transition("1", "tau", "0").unwrap();
        b.initial("0").unwrap();
        let l = b.build().unwrap();
        let text = export_aut(&l);
        assert!(text.contains("(1,\"tau\",0)"));
        let back = parse_aut("x.aut", &text).unwrap();
        assert!(lts_isomorphic(&l, &back));
        assert!(parse_aut("x.aut", "des (0, 2, 1)\n(0,\"a\",0)\n").is_err());
    }

    #[test]
    fn dot_lists_nodes_and_edges() {
        let f = super::super::parse_fts("features f\nstates a b\ninit a\ntrans a -> b : go [f]\n")
            .unwrap();
        let dot = export_dot_fts(&f);
        assert!(dot.contains("\"a\" [shape=doublecircle];"));
        assert!(dot.contains("\"a\" -> \"b\" [label=\"go [f]\"];"));
        assert!(export_dot_lts(&f.erase_guards()).contains("label=\"go\""));
    }

    #[test]
    fn relation_lines() {
        let f = super::super::parse_fts("features f\nstates a b\ninit a\ntrans a -> b : go [f]\n")
            .unwrap();
        let r = parse_relation("r", "a | f | b\nb | true | a   # ok\n", &f, &f).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].1.count(), 1);
        let r = parse_relation("r", "a | f | !f | b\n", &f, &f).unwrap();
        assert!(r[0].1.is_full());
        assert!(parse_relation("r", "a | f\n", &f, &f).is_err());
        assert!(parse_relation("r", "zz | f | a\n", &f, &f).is_err());
    }
}
