//! Features, products, feature expressions and feature models.
//!
//! Expressions are given meaning over a finite, explicitly enumerated
//! [`Universe`] of products; their canonical form is a [`ProductSet`].

mod expr;
mod model;
mod product;

pub use expr::FeatureExpr;
pub use model::{FeatureModel, FeatureModelBuilder, Group, GroupKind, Membership};
pub use product::{Product, ProductSet, Universe, MAX_POWER_SET_FEATURES};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeatureError {
    #[error("undeclared feature `{0}`")]
    UndeclaredFeature(String),
    #[error("invalid feature name `{0}`")]
    InvalidName(String),
    #[error("duplicate feature `{0}`")]
    DuplicateFeature(String),
    #[error("the product set is empty")]
    EmptyUniverse,
    #[error("duplicate product {0}")]
    DuplicateProduct(String),
    #[error("product sets over different universes ({left} vs {right} products)")]
    UniverseMismatch { left: usize, right: usize },
    #[error("too many features ({0}) to enumerate")]
    TooManyFeatures(usize),
    #[error("feature model: {0}")]
    Model(String),
}

/// Letters, digits and underscores, not starting with a digit.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
