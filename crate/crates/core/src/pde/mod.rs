//! Finite-difference solver for `-div(a(u) grad u) = f` on the unit cube
//! with zero Dirichlet data and `a(s) = a_low / ((1+|s|) ln(e+|s|))^theta`.

mod analyze;
mod cg;
mod picard;
mod problem;

pub use analyze::{
    analysis_levels, analyze_solution, analyze_with_companion, coarse_resolution, ExponentComparison, MaxStability,
    PdeAnalysis, ANALYSIS_LEVELS, EXPONENT_BAND, STABILITY_TOL,
};
pub use cg::{conjugate_gradient, CgOutcome, Stencil};
pub use picard::{read_field_binary, solve_picard, write_field_binary, PdeSolution, DEFAULT_OMEGA, MAX_HALVINGS};
pub use problem::{
    build_source, coefficient_a, source_exponent_floor, source_weak_norm, unit_ball_volume, FaceAveraging, PdeProblem,
    SourceNormReport, SourceSpec,
};
