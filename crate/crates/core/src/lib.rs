//! Decay bounds for non-increasing level-set functions that satisfy
//! truncation-type recursions `phi(h) <= W(h, k) phi(k)^beta`, together
//! with brute-force certification, counterexample checks, level-set
//! analytics and a small degenerate elliptic solver.

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod counterexample;
pub mod envelope;
pub mod error;
pub mod growth;
mod hp;
pub mod lemma;
pub mod levelset;
pub mod numeric;
pub mod pde;

pub use error::{Error, Result};
pub use growth::GrowthFunction;
pub use lemma::{DecayBound, LemmaParams, Variant};
