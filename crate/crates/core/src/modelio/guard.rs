use super::lexer::{Cursor, Tok};
use super::ModelError;
use crate::featurecore::FeatureExpr;

/// `expr := or (('->' | '<->') or)?`
pub(crate) fn expr(c: &mut Cursor) -> Result<FeatureExpr, ModelError> {
    let lhs = or(c)?;
    if c.eat("->") {
        Ok(FeatureExpr::implies(lhs, or(c)?))
    } else if c.eat("<->") {
        Ok(FeatureExpr::iff(lhs, or(c)?))
    } else {
        Ok(lhs)
    }
}

fn or(c: &mut Cursor) -> Result<FeatureExpr, ModelError> {
    let mut e = and(c)?;
    while c.eat("|") {
        e = FeatureExpr::or(e, and(c)?);
    }
    Ok(e)
}

fn and(c: &mut Cursor) -> Result<FeatureExpr, ModelError> {
    let mut e = lit(c)?;
    while c.eat("&") {
        e = FeatureExpr::and(e, lit(c)?);
    }
    Ok(e)
}

fn lit(c: &mut Cursor) -> Result<FeatureExpr, ModelError> {
    if c.eat("!") {
        return Ok(FeatureExpr::not(lit(c)?));
    }
    if c.eat("(") {
        let e = expr(c)?;
        c.expect(")")?;
        return Ok(e);
    }
    match c.peek() {
        Some(Tok::Ident(w)) => {
            let e = match w.as_str() {
                "true" => FeatureExpr::True,
                "false" => FeatureExpr::False,
                _ if crate::featurecore::is_identifier(w) => FeatureExpr::atom(w.clone()),
                _ => return Err(c.error(format!("invalid feature name `{w}`"))),
            };
            c.bump();
            Ok(e)
        }
        _ => Err(c.error(format!(
            "expected a feature expression, found {}",
            c.describe()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::super::lexer::tokenize;
    use super::*;

    fn parse(s: &str) -> Result<FeatureExpr, ModelError> {
        let toks = tokenize("t", s, 1, 1, false)?;
        let mut c = Cursor::new("t", &toks, (1, s.len() + 1));
        let e = expr(&mut c)?;
        c.finish()?;
        Ok(e)
    }

    #[test]
    fn precedence() {
        assert_eq!(parse("a | b & c").unwrap().to_string(), "a | b & c");
        assert_eq!(
            parse("a | b & c").unwrap(),
            FeatureExpr::or(
                FeatureExpr::atom("a"),
                FeatureExpr::and(FeatureExpr::atom("b"), FeatureExpr::atom("c"))
            )
        );
        assert_eq!(parse("D & SC -> U").unwrap().to_string(), "D & SC -> U");
        assert_eq!(parse("!(P & D)").unwrap().to_string(), "!(P & D)");
    }

    #[test]
    fn errors_have_positions() {
        let err = parse("a & ").unwrap_err();
        assert_eq!(err.span().unwrap().column, 5);
        assert!(parse("a b").is_err());
        assert!(parse("(a").is_err());
    }
}
