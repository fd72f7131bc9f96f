use super::lexer::{tokenize, Cursor, Tok};
use super::{ModelError, SourceSpan};
use crate::mucheck::{ActionFormula, MuFormula, RegularFormula};

/// A named property from a `.mcf` file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedProperty {
    pub name: String,
    pub formula: MuFormula,
}

/// Parses a single closed formula.
pub fn parse_property(text: &str) -> Result<MuFormula, ModelError> {
    parse_property_in("<input>", text)
}

pub fn parse_property_in(file: &str, text: &str) -> Result<MuFormula, ModelError> {
    let toks = tokenize(file, text, 1, 1, false)?;
    let mut c = Cursor::new(file, &toks, end_of(text));
    let start = c.span();
    let f = formula(&mut c)?;
    c.finish()?;
    check_closed(&f, start)?;
    Ok(f)
}

/// Parses `prop <name> := <formula>` stanzas.
pub fn parse_properties(file: &str, text: &str) -> Result<Vec<NamedProperty>, ModelError> {
    let toks = tokenize(file, text, 1, 1, false)?;
    let mut c = Cursor::new(file, &toks, end_of(text));
    let mut out: Vec<NamedProperty> = Vec::new();
    while !c.at_end() {
        if !c.eat_word("prop") {
            return Err(c.error(format!("expected `prop`, found {}", c.describe())));
        }
        let name_span = c.span();
        let name = c.ident("a property name")?;
        if out.iter().any(|p| p.name == name) {
            return Err(ModelError::syntax(
                name_span,
                format!("duplicate property `{name}`"),
            ));
        }
        c.expect(":=")?;
        let start = c.span();
        let f = formula(&mut c)?;
        check_closed(&f, start)?;
        out.push(NamedProperty { name, formula: f });
    }
    Ok(out)
}

pub fn load_properties(path: &std::path::Path) -> Result<Vec<NamedProperty>, ModelError> {
    let text = super::read(path)?;
    parse_properties(&path.display().to_string(), &text)
}

pub fn serialize_properties(props: &[NamedProperty]) -> String {
    props
        .iter()
        .map(|p| format!("prop {} := {}\n", p.name, p.formula))
        .collect()
}

fn end_of(text: &str) -> (usize, usize) {
    let lines: Vec<&str> = text.split('\n').collect();
    (
        lines.len(),
        lines.last().map_or(0, |l| l.chars().count()) + 1,
    )
}

fn check_closed(f: &MuFormula, span: SourceSpan) -> Result<(), ModelError> {
    match f.free_vars().into_iter().next() {
        Some(x) => Err(ModelError::syntax(span, format!("unbound variable `{x}`"))),
        None => Ok(()),
    }
}

fn formula(c: &mut Cursor) -> Result<MuFormula, ModelError> {
    let mut f = conj(c)?;
    while c.eat("||") {
        f = MuFormula::or(f, conj(c)?);
    }
    Ok(f)
}

fn conj(c: &mut Cursor) -> Result<MuFormula, ModelError> {
    let mut f = unary(c)?;
    while c.eat("&&") {
        f = MuFormula::and(f, unary(c)?);
    }
    Ok(f)
}

fn unary(c: &mut Cursor) -> Result<MuFormula, ModelError> {
    if c.eat("[") {
        let r = regular(c)?;
        c.expect("]")?;
        return Ok(MuFormula::boxed(r, unary(c)?));
    }
    if c.eat("<") {
        let r = regular(c)?;
        c.expect(">")?;
        return Ok(MuFormula::diamond(r, unary(c)?));
    }
    if c.eat("(") {
        let f = formula(c)?;
        c.expect(")")?;
        return Ok(f);
    }
    match c.peek() {
        Some(Tok::Ident(w)) => match w.as_str() {
            "true" => {
                c.bump();
                Ok(MuFormula::True)
            }
            "false" => {
                c.bump();
                Ok(MuFormula::False)
            }
            "mu" | "nu" => {
                let is_mu = w == "mu";
                c.bump();
                let x = variable(c)?;
                c.expect(".")?;
                let body = formula(c)?;
                Ok(if is_mu {
                    MuFormula::mu(x, body)
                } else {
                    MuFormula::nu(x, body)
                })
            }
            _ => Ok(MuFormula::var(variable(c)?)),
        },
        _ => Err(c.error(format!("expected a formula, found {}", c.describe()))),
    }
}

fn variable(c: &mut Cursor) -> Result<String, ModelError> {
    let span = c.span();
    let x = c.ident("a variable")?;
    if ["true", "false", "mu", "nu"].contains(&x.as_str()) || !crate::featurecore::is_identifier(&x)
    {
        return Err(ModelError::syntax(
            span,
            format!("invalid variable name `{x}`"),
        ));
    }
    Ok(x)
}

fn regular(c: &mut Cursor) -> Result<RegularFormula, ModelError> {
    let mut r = postfix(c)?;
    while c.eat(".") {
        r = RegularFormula::seq(r, postfix(c)?);
    }
    Ok(r)
}

fn postfix(c: &mut Cursor) -> Result<RegularFormula, ModelError> {
    let mut r = af_or(c)?;
    while c.eat("*") {
        r = RegularFormula::star(r);
    }
    Ok(r)
}

fn as_action(r: RegularFormula, span: SourceSpan) -> Result<ActionFormula, ModelError> {
    match r {
        RegularFormula::Act(a) => Ok(a),
        _ => Err(ModelError::syntax(
            span,
            "regular formula used where an action formula is required",
        )),
    }
}

fn af_or(c: &mut Cursor) -> Result<RegularFormula, ModelError> {
    let span = c.span();
    let mut r = af_and(c)?;
    while c.eat("||") {
        let rhs_span = c.span();
        let lhs = as_action(r, span.clone())?;
        let rhs = af_and(c)?;
        r = RegularFormula::act(ActionFormula::or(lhs, as_action(rhs, rhs_span)?));
    }
    Ok(r)
}

fn af_and(c: &mut Cursor) -> Result<RegularFormula, ModelError> {
    let span = c.span();
    let mut r = af_not(c)?;
    while c.eat("&&") {
        let rhs_span = c.span();
        let lhs = as_action(r, span.clone())?;
        let rhs = af_not(c)?;
        r = RegularFormula::act(ActionFormula::and(lhs, as_action(rhs, rhs_span)?));
    }
    Ok(r)
}

fn af_not(c: &mut Cursor) -> Result<RegularFormula, ModelError> {
    if c.eat("!") {
        let span = c.span();
        let inner = af_not(c)?;
        return Ok(RegularFormula::act(ActionFormula::not(as_action(
            inner, span,
        )?)));
    }
    if c.eat("(") {
        let r = regular(c)?;
        c.expect(")")?;
        return Ok(r);
    }
    let span = c.span();
    let name = c.ident("an action")?;
    if name == "true" {
        return Ok(RegularFormula::act(ActionFormula::True));
    }
    if name == crate::transys::TAU_NAME {
        return Err(ModelError::syntax(
            span,
            "`tau` cannot be named in a property",
        ));
    }
    if !crate::featurecore::is_identifier(&name) {
        return Err(ModelError::syntax(
            span,
            format!("invalid action name `{name}`"),
        ));
    }
    // `insertBev(Euro)` is the atomic action `insertBev_Euro`
    if c.peek() == Some(&Tok::Sym("(")) && matches!(c.peek2(), Some(Tok::Ident(_))) {
        c.bump();
        let arg = c.ident("an action argument")?;
        c.expect(")")?;
        return Ok(RegularFormula::act(ActionFormula::lit(format!(
            "{name}_{arg}"
        ))));
    }
    Ok(RegularFormula::act(ActionFormula::lit(name)))
}
