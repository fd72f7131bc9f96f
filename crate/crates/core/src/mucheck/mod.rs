//! Modal mu-calculus model checking over LTSs and the product and family
//! verification pipelines.

pub mod bench;
mod desugar;
mod eval;
mod formula;
mod verify;

pub use desugar::{desugar, is_core};
pub use eval::{evaluate, matching_actions, relevant_actions, Evaluation, MuError};
pub use formula::{ActionFormula, MuFormula, RegularFormula};
pub use verify::{
    all_products, keep_set, render_reports, verify, verify_family, verify_products, ModelSize,
    Pipeline, VerificationReport, VerifyError, VerifyOptions,
};
