//! Decay conclusions for the four recursion families and the geometric
//! iteration primitive.

mod bound;
mod classical;
mod generalized;
mod giusti;
mod params;

pub use bound::{eval_bound, ln_eval_bound, Conclusion, DecayBound};
pub use classical::{classical_bound, gzm_bound};
pub use generalized::{first_gen_bound, limit_condition_holds, second_gen_bound};
pub use giusti::{giusti_iterate, giusti_iterate_at_threshold, giusti_threshold, GiustiRun, DECAY_REL_TOL};
pub use params::{AxiomMode, Branch, LemmaParams, Variant};

use crate::error::Result;
use serde::{Deserialize, Serialize};

/// Optional knobs for the branches that take them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundOptions {
    #[serde(default)]
    pub tau_hint: Option<f64>,
    #[serde(default)]
    pub theta_tilde: Option<f64>,
    #[serde(default)]
    pub eps0: Option<f64>,
}

/// Dispatch on the variant.
pub fn compute_bound(p: &LemmaParams, opts: &BoundOptions) -> Result<Conclusion> {
    match p.variant {
        Variant::Classical => classical_bound(p),
        Variant::PowerWeighted => gzm_bound(p),
        Variant::FirstGeneralized => first_gen_bound(p, opts.tau_hint),
        Variant::SecondGeneralized => second_gen_bound(p, opts.theta_tilde, opts.eps0),
    }
}
