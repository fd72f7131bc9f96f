//! Text formats: `.fts` models, `.fm` feature models, `.mcf` properties,
//! Aldebaran `.aut` and Graphviz `.dot` exports.

mod export;
mod fm_format;
mod fts_format;
mod guard;
mod lexer;
mod property;

pub use export::{export_aut, export_dot_fts, export_dot_lts, parse_aut, parse_relation};
pub use fm_format::{
    load_feature_model, parse_feature_model, parse_feature_model_in, serialize_feature_model,
};
pub use fts_format::{
    load_fts, parse_fts, parse_fts_with, serialize_fts, serialize_fts_with_model, FtsDocument,
};
pub use property::{
    load_properties, parse_properties, parse_property, parse_property_in, serialize_properties,
    NamedProperty,
};

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::featurecore::FeatureExpr;

/// Position of a diagnostic; line and column start at 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub column: usize,
}

impl SourceSpan {
    pub fn new(file: &str, line: usize, column: usize) -> Self {
        SourceSpan {
            file: file.to_string(),
            line: line.max(1),
            column: column.max(1),
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{span}: {message}")]
    Syntax { span: SourceSpan, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ModelError {
    pub(crate) fn syntax(span: SourceSpan, message: impl Into<String>) -> Self {
        ModelError::Syntax {
            span,
            message: message.into(),
        }
    }

    pub fn span(&self) -> Option<&SourceSpan> {
        match self {
            ModelError::Syntax { span, .. } => Some(span),
            ModelError::Io { .. } => None,
        }
    }
}

pub(crate) fn read(path: &Path) -> Result<String, ModelError> {
    std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses a standalone guard expression such as `a & !b`.
pub fn parse_guard(text: &str) -> Result<FeatureExpr, ModelError> {
    let toks = lexer::tokenize("<guard>", text, 1, 1, false)?;
    let mut c = lexer::Cursor::new("<guard>", &toks, (1, text.chars().count() + 1));
    let e = guard::expr(&mut c)?;
    c.finish()?;
    Ok(e)
}
