//! Featured and plain labeled transition systems.

mod fts;
mod iso;
mod lts;

pub use fts::{FeaturedLabel, Fts, FtsBuilder, FtsTransition, ReachMap};
pub use iso::{fts_isomorphic, lts_isomorphic};
pub use lts::{Lts, LtsBuilder};

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::featurecore::{is_identifier, FeatureError};

/// Reserved name of the silent action.
pub const TAU_NAME: &str = "tau";

/// Index into an [`Alphabet`]; `0` is always τ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId(pub u32);

pub const TAU: ActionId = ActionId(0);

impl ActionId {
    pub fn is_tau(self) -> bool {
        self == TAU
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// τ followed by the visible action names in sorted order.
///
/// Two alphabets over the same visible names assign the same ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new<I, S>(visible: I) -> Result<Self, TransysError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for name in visible {
            let name = name.as_ref();
            if name == TAU_NAME {
                continue;
            }
            if !is_identifier(name) {
                return Err(TransysError::InvalidAction(name.to_string()));
            }
            set.insert(name.to_string());
        }
        let mut names = vec![TAU_NAME.to_string()];
        names.extend(set);
        Ok(Alphabet { names })
    }

    pub fn id(&self, name: &str) -> Option<ActionId> {
        if name == TAU_NAME {
            return Some(TAU);
        }
        self.names[1..]
            .binary_search_by(|n| n.as_str().cmp(name))
            .ok()
            .map(|i| ActionId(i as u32 + 1))
    }

    pub fn name(&self, id: ActionId) -> &str {
        &self.names[id.index()]
    }

    /// Number of actions including τ.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    /// Never true: τ is always present.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn visible(&self) -> impl Iterator<Item = &str> {
        self.names[1..].iter().map(String::as_str)
    }

    pub fn ids(&self) -> impl Iterator<Item = ActionId> {
        (0..self.names.len() as u32).map(ActionId)
    }

    /// Union of the visible names of both alphabets.
    pub fn union(&self, other: &Alphabet) -> Alphabet {
        Alphabet::new(self.visible().chain(other.visible())).expect("names already validated")
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.names[1..].join(" "))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransysError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state index {0} out of range")]
    StateOutOfRange(usize),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("invalid state name `{0}`")]
    InvalidState(String),
    #[error("invalid action name `{0}`")]
    InvalidAction(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("no initial state")]
    NoInitial,
    #[error("no states")]
    NoStates,
    #[error("product {0} is not in the product set")]
    UnknownProduct(String),
    #[error("`tau` cannot be kept visible")]
    KeepTau,
    #[error("systems are defined over different product sets")]
    UniverseMismatch,
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

/// State names: identifiers, possibly dotted (`s0.t3`) as produced by
/// composition.
pub fn is_state_name(s: &str) -> bool {
    !s.is_empty()
        && s.split('.').all(|part| {
            !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        })
}
