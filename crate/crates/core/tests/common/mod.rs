#![allow(dead_code)]

use levelset_decay::envelope::{build_grid, check_dominance, extremal_envelope, DominanceReport, VANISH_TOL};
use levelset_decay::lemma::{compute_bound, BoundOptions, Conclusion, DecayBound, LemmaParams, Variant};
use levelset_decay::levelset::DistributionProfile;
use levelset_decay::GrowthFunction;
use rand::Rng;

pub fn growth_pool() -> [GrowthFunction; 3] {
    [GrowthFunction::identity(), GrowthFunction::loglinear(), GrowthFunction::power(1.5).unwrap()]
}

/// Random parameters with `beta in [1.2, 3]`.
pub fn sample_superlinear<R: Rng>(rng: &mut R, v: Variant) -> LemmaParams {
    let g = growth_pool()[rng.gen_range(0..3)].clone();
    let theta = match v {
        Variant::Classical => 0.0,
        Variant::SecondGeneralized => rng.gen_range(0.0..0.9 / g.mu()),
        _ => rng.gen_range(0.0..0.9),
    };
    LemmaParams::new(
        v,
        rng.gen_range(0.5..2.0),
        rng.gen_range(0.5..3.0),
        rng.gen_range(1.2..3.0),
        theta,
        rng.gen_range(0.5..5.0),
        rng.gen_range(0.1..10.0),
    )
    .with_growth(g)
}

/// Random parameters with `beta = 1` (`linear`) or `beta in [0.2, 0.8]`.
pub fn sample_sub<R: Rng>(rng: &mut R, v: Variant, linear: bool) -> LemmaParams {
    let ng = if v == Variant::FirstGeneralized { 2 } else { 3 };
    let g = growth_pool()[rng.gen_range(0..ng)].clone();
    let theta = match (v, linear) {
        (Variant::Classical, _) => 0.0,
        (Variant::SecondGeneralized, true) => rng.gen_range(0.0..0.9 / g.mu()),
        (Variant::SecondGeneralized, false) => rng.gen_range(0.0..0.3),
        _ => rng.gen_range(0.0..0.9),
    };
    let beta = if linear { 1.0 } else { rng.gen_range(0.2..0.8) };
    LemmaParams::new(
        v,
        rng.gen_range(0.5..2.0),
        rng.gen_range(0.5..3.0),
        beta,
        theta,
        rng.gen_range(0.5..5.0),
        rng.gen_range(0.1..10.0),
    )
    .with_growth(g)
}

/// Upper grid level used for dominance checks.
pub fn dominance_k_max(p: &LemmaParams, b: &DecayBound) -> f64 {
    match *b {
        DecayBound::StretchedExp { k0, tau, power, .. } => k0 + tau * 40f64.powf(1.0 / power),
        _ => p.k0 * 1e6,
    }
}

pub struct DominanceRun {
    pub conclusion: Conclusion,
    pub coarse: DominanceReport,
    /// Worst ratio on the refined grid, restricted to the coarse levels.
    pub refined_worst_shared: f64,
}

pub fn dominance_run(p: &LemmaParams) -> DominanceRun {
    let conclusion = compute_bound(p, &BoundOptions::default()).unwrap();
    let k_max = dominance_k_max(p, &conclusion.bound);
    let grid = build_grid(p, k_max, 128, Some(&conclusion.bound)).unwrap();
    let env = extremal_envelope(p, &grid).unwrap();
    let coarse = check_dominance(&conclusion.bound, &env, &p.growth, 0.05, VANISH_TOL);
    let fine_grid = grid.refined().unwrap();
    let fine = extremal_envelope(p, &fine_grid).unwrap();
    let fine_rep = check_dominance(&conclusion.bound, &fine, &p.growth, 0.05, VANISH_TOL);
    let shared: std::collections::HashSet<u64> = grid.levels().iter().map(|l| l.to_bits()).collect();
    let refined_worst_shared = fine_rep
        .rows
        .iter()
        .filter(|r| shared.contains(&r.level.to_bits()))
        .map(|r| r.ratio)
        .fold(0.0, f64::max);
    DominanceRun { conclusion, coarse, refined_worst_shared }
}

/// Envelope value at the vanishing level of a superlinear bound, over `phi0`.
pub fn vanishing_ratio(p: &LemmaParams) -> f64 {
    let c = compute_bound(p, &BoundOptions::default()).unwrap();
    let DecayBound::Vanishes { level } = c.bound else { panic!("expected a vanishing bound, got {:?}", c.bound) };
    let grid = build_grid(p, level * 1.5, 64, Some(&c.bound)).unwrap();
    let env = extremal_envelope(p, &grid).unwrap();
    env.value_at_level(level).unwrap() / p.phi0
}

pub fn synthetic_profile<F: Fn(f64) -> f64>(lo: f64, hi: f64, n: usize, phi: F) -> DistributionProfile {
    let levels = levelset_decay::numeric::log_space(lo, hi, n);
    let measures: Vec<f64> = levels.iter().map(|&k| phi(k)).collect();
    let total = measures[0].max(1.0);
    DistributionProfile::from_samples(levels, measures, total).unwrap()
}
