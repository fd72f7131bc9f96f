//! Branching bisimulation minimization for labeled transition systems and
//! coherent branching feature bisimulation minimization for featured
//! transition systems, with the supporting feature-model, file-format and
//! mu-calculus machinery.

pub mod coloring;
pub mod featurecore;
pub mod ftsmin;
pub mod gen;
pub mod ltsmin;
pub mod modelio;
pub mod mucheck;
pub mod transys;
