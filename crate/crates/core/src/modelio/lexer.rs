use super::{ModelError, SourceSpan};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Sym(&'static str),
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMBOLS: [&str; 21] = [
    "<->", "->", "&&", "||", ":=", "(", ")", "[", "]", "<", ">", "!", "&", "|", ".", "*", "{", "}",
    ";", ",", ":",
];

/// Splits `text` into tokens. Comments start with `#` or `%` and run to the
/// end of the line. With `dotted`, dots are part of identifiers (state
/// names such as `s0.t1`).
pub(crate) fn tokenize(
    file: &str,
    text: &str,
    first_line: usize,
    first_col: usize,
    dotted: bool,
) -> Result<Vec<Token>, ModelError> {
    let mut out = Vec::new();
    let mut line = first_line;
    let mut col = first_col;
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        if c == '#' || c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric()
                    || chars[i] == '_'
                    || (dotted && chars[i] == '.'))
            {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            out.push(Token {
                tok: Tok::Ident(word),
                line,
                col,
            });
            col += i - start;
            continue;
        }
        let rest = &chars[i..];
        let sym = SYMBOLS.iter().find(|s| {
            let sc: Vec<char> = s.chars().collect();
            rest.len() >= sc.len() && rest[..sc.len()] == sc[..]
        });
        match sym {
            Some(s) => {
                out.push(Token {
                    tok: Tok::Sym(s),
                    line,
                    col,
                });
                let w = s.chars().count();
                i += w;
                col += w;
            }
            None => {
                return Err(ModelError::syntax(
                    SourceSpan::new(file, line, col),
                    format!("unexpected character `{}`", c.escape_default()),
                ))
            }
        }
    }
    Ok(out)
}

/// Cursor over a token list with span-aware errors.
pub(crate) struct Cursor<'a> {
    pub file: &'a str,
    toks: &'a [Token],
    pos: usize,
    end: (usize, usize),
}

impl<'a> Cursor<'a> {
    /// `end` is the position reported for "unexpected end of input".
    pub fn new(file: &'a str, toks: &'a [Token], end: (usize, usize)) -> Self {
        Cursor {
            file,
            toks,
            pos: 0,
            end,
        }
    }

    pub fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn peek2(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos + 1).map(|t| &t.tok)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn span(&self) -> SourceSpan {
        match self.toks.get(self.pos) {
            Some(t) => SourceSpan::new(self.file, t.line, t.col),
            None => SourceSpan::new(self.file, self.end.0, self.end.1),
        }
    }

    pub fn error(&self, message: impl Into<String>) -> ModelError {
        ModelError::syntax(self.span(), message)
    }

    pub fn bump(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos).map(|t| &t.tok);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn eat_word(&mut self, word: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(w)) if w == word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, sym: &str) -> Result<(), ModelError> {
        if self.eat(sym) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{sym}`, found {}", self.describe())))
        }
    }

    pub fn ident(&mut self, what: &str) -> Result<String, ModelError> {
        match self.peek() {
            Some(Tok::Ident(w)) => {
                self.pos += 1;
                Ok(w.clone())
            }
            _ => Err(self.error(format!("expected {what}, found {}", self.describe()))),
        }
    }

    pub fn describe(&self) -> String {
        match self.peek() {
            Some(Tok::Ident(w)) => format!("`{w}`"),
            Some(Tok::Sym(s)) => format!("`{s}`"),
            None => "end of input".to_string(),
        }
    }

    pub fn finish(&self) -> Result<(), ModelError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error(format!("unexpected {}", self.describe())))
        }
    }
}
