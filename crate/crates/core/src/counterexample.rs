//! Constant constructions for the doubling/full-form equivalence with
//! `0 < beta < 1`, and the two witnesses showing non-equivalence for
//! `beta = 1` and `beta > 1`.

use crate::envelope::RESIDUAL_FLOOR;
use crate::error::{param, require_nonnegative, require_positive, Error, Result};
use crate::growth::{verify_axioms, AxiomReport, GrowthFunction};
use crate::numeric::log_space;
use crate::hp::{Hp, PREC};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Taking `h = 2k` in the full form gives the doubling form with the same
/// constant.
pub fn equivalence_forward(c: f64) -> Result<f64> {
    require_positive("c", c)?;
    Ok(c)
}

/// Doubling hypothesis `phi(2k) <= c_tilde / g(k)^alpha * phi(k)^beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingParams {
    pub c_tilde: f64,
    pub alpha: f64,
    pub beta: f64,
    pub k0: f64,
    pub growth: GrowthFunction,
    pub phi0: f64,
}

impl DoublingParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("c_tilde", self.c_tilde)?;
        require_positive("alpha", self.alpha)?;
        require_positive("beta", self.beta)?;
        require_positive("k0", self.k0)?;
        require_nonnegative("phi0", self.phi0)
    }

    fn doubling_rhs(&self, k: f64, v: f64) -> f64 {
        if v == 0.0 {
            return 0.0;
        }
        self.c_tilde / self.growth.value(k).powf(self.alpha) * v.powf(self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackwardConstant {
    /// Full-form constant `max(c_case1, c_bar^(1-beta))`.
    pub c: f64,
    /// `c_tilde 4^(mu alpha)`, valid when `h > 2k`.
    pub c_case1: f64,
    /// Power-envelope constant built from `c_case1`.
    pub c_bar: f64,
}

/// Full-form constant implied by the doubling form when `0 < beta < 1`.
pub fn equivalence_backward_constant(dp: &DoublingParams) -> Result<BackwardConstant> {
    dp.validate()?;
    if !(dp.beta > 0.0 && dp.beta < 1.0) {
        return Err(param(format!("beta must lie in (0, 1), got {}", dp.beta)));
    }
    let conf = dp.growth.conformance();
    if !(conf.convex_monotone && conf.doubling) {
        return Err(Error::Axiom(format!("{} is not a conforming growth function", dp.growth.name())));
    }
    let (a, b, mu) = (dp.alpha, dp.beta, dp.growth.mu());
    let om = 1.0 - b;
    let c_case1 = dp.c_tilde * 4f64.powf(mu * a);
    let c_bar = 2f64.powf(mu * a * (2.0 - b) / (om * om))
        * (c_case1.powf(1.0 / om) + dp.growth.value(dp.k0).powf(a / om) * dp.phi0);
    Ok(BackwardConstant { c: c_case1.max(c_bar.powf(om)), c_case1, c_bar })
}

/// Level function on the doubling-closed grid `k0 2^(j/m)`, extended to
/// the continuum by taking, at any `k`, the value at the smallest grid
/// level `>= k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingProfile {
    pub per_octave: usize,
    pub levels: Vec<f64>,
    pub values: Vec<f64>,
}

impl DoublingProfile {
    pub fn last_level(&self) -> f64 {
        *self.levels.last().unwrap()
    }

    /// Step extension; `None` outside `[k0, last level]`.
    pub fn value(&self, k: f64) -> Option<f64> {
        if k < self.levels[0] || k > self.last_level() {
            return None;
        }
        let j = self.levels.partition_point(|&l| l < k);
        Some(self.values[j])
    }
}

fn doubling_levels(dp: &DoublingParams, octaves: usize, per_octave: usize) -> Vec<f64> {
    let n = octaves * per_octave + 1;
    let mut levels = Vec::with_capacity(n);
    for j in 0..n {
        if j < per_octave {
            levels.push(dp.k0 * 2f64.powf(j as f64 / per_octave as f64));
        } else {
            levels.push(2.0 * levels[j - per_octave]);
        }
    }
    levels
}

fn doubling_profile(dp: &DoublingParams, octaves: usize, per_octave: usize, mut shrink: impl FnMut() -> f64) -> Result<DoublingProfile> {
    dp.validate()?;
    if octaves == 0 || per_octave == 0 {
        return Err(param("octaves and per_octave must be >= 1"));
    }
    let levels = doubling_levels(dp, octaves, per_octave);
    let mut values = vec![dp.phi0; levels.len()];
    for j in 1..levels.len() {
        let mut v = values[j - 1];
        if j >= per_octave {
            v = v.min(dp.doubling_rhs(levels[j - per_octave], values[j - per_octave]));
        }
        values[j] = v * shrink();
    }
    Ok(DoublingProfile { per_octave, levels, values })
}

/// Largest non-increasing grid function with `phi(k0) = phi0` that
/// satisfies the doubling form on the grid.
pub fn doubling_envelope(dp: &DoublingParams, octaves: usize, per_octave: usize) -> Result<DoublingProfile> {
    doubling_profile(dp, octaves, per_octave, || 1.0)
}

/// Random admissible profile: every step of the doubling envelope
/// recursion is multiplied by a factor drawn from `(1/2, 1]`.
pub fn random_doubling_profile(dp: &DoublingParams, octaves: usize, per_octave: usize, seed: u64) -> Result<DoublingProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    doubling_profile(dp, octaves, per_octave, || 1.0 - 0.5 * rng.gen::<f64>())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifierReport {
    pub constant: f64,
    pub pairs_checked: usize,
    pub violations: usize,
    pub worst_residual: f64,
    /// `(k, h)` at the worst residual.
    pub worst_pair: Option<(f64, f64)>,
}

/// Relative slack below which a full-form residual is treated as rounding.
pub const VERIFIER_TOL: f64 = 1e-12;

/// Sample `pairs` random `(h, k)` with `k0 <= k < h <= last level` and test
/// `phi(h) <= c / g(h-k)^alpha * phi(k)^beta` on the step extension.
pub fn verify_full_form(dp: &DoublingParams, c: f64, prof: &DoublingProfile, pairs: usize, seed: u64) -> Result<VerifierReport> {
    dp.validate()?;
    require_positive("c", c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = prof.last_level();
    let span = (top / dp.k0).ln();
    let mut rep = VerifierReport { constant: c, pairs_checked: 0, violations: 0, worst_residual: f64::NEG_INFINITY, worst_pair: None };
    for _ in 0..pairs {
        let k = (dp.k0 * (span * rng.gen::<f64>()).exp()).min(top);
        let room = top - k;
        if room <= 0.0 {
            continue;
        }
        let h = (k + room * 1e-6f64.powf(rng.gen::<f64>())).min(top);
        if h <= k {
            continue;
        }
        let (Some(ph), Some(pk)) = (prof.value(h), prof.value(k)) else { continue };
        let rhs = if pk == 0.0 { 0.0 } else { c / dp.growth.value(h - k).powf(dp.alpha) * pk.powf(dp.beta) };
        let r = (ph - rhs) / rhs.max(RESIDUAL_FLOOR);
        rep.pairs_checked += 1;
        if r > VERIFIER_TOL {
            rep.violations += 1;
        }
        if r > rep.worst_residual {
            rep.worst_residual = r;
            rep.worst_pair = Some((k, h));
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub k: f64,
    pub phi_k: f64,
    pub phi_2k: f64,
    /// Relative residual of the doubling identity in 192-bit arithmetic.
    pub residual: f64,
    /// The same residual evaluated in plain double precision.
    pub residual_f64: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaProbe {
    pub lambda: f64,
    /// Level at which `lambda k - (ln k)^2` is largest on the probe grid.
    pub k_at_max: f64,
    /// `max (lambda k - (ln k)^2)`, i.e. the log of the probe value.
    pub log_max: f64,
    /// `log_max > ln(1e6)`.
    pub exceeds_million: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessBetaOneReport {
    pub c_tilde: f64,
    pub alpha: f64,
    pub rows: Vec<IdentityRow>,
    pub max_residual: f64,
    pub probes: Vec<LambdaProbe>,
    pub k_max: f64,
    /// Axiom check of `g(k) = k^(ln 2)` on `(0, 10]`.
    pub growth_axioms: AxiomReport,
}

pub const DEFAULT_LAMBDAS: [f64; 4] = [1e-3, 1e-2, 1e-1, 1.0];
pub const WITNESS_K_MAX: f64 = 1e6;

/// `exp(-(ln k)^2)` at each level, correctly rounded to f64.
pub fn witness_beta_one_values(k_values: &[f64]) -> Result<Vec<f64>> {
    let mut hp = Hp::new()?;
    k_values
        .iter()
        .map(|&k| {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::Domain(format!("witness levels must be positive and finite, got {k}")));
            }
            let x = hp.f(k);
            Hp::to_f64(&hp.witness(&x))
        })
        .collect()
}

/// `phi(k) = exp(-(ln k)^2)` against `phi(2k) = 2^(-ln 2) k^(-2 ln 2) phi(k)`,
/// and the growth of `exp(lambda k) phi(k)` for each probe `lambda`.
pub fn witness_beta_one(k_values: &[f64], lambdas: &[f64]) -> Result<WitnessBetaOneReport> {
    if let Some(&k) = k_values.iter().find(|&&k| !(k.is_finite() && k >= 1.0)) {
        return Err(Error::Domain(format!("witness is defined for k >= 1, got {k}")));
    }
    let ln2 = std::f64::consts::LN_2;
    let mut hp = Hp::new()?;
    let rm = hp.rm;
    let two = hp.f(2.0);
    let big_ln2 = two.ln(PREC, rm, &mut hp.cc);
    let ct = two.pow(&big_ln2.neg(), PREC, rm, &mut hp.cc);
    let mut rows = Vec::with_capacity(k_values.len());
    let mut max_residual: f64 = 0.0;
    for &k in k_values {
        let kk = hp.f(k);
        let phi_k = hp.witness(&kk);
        let phi_2k = hp.witness(&kk.mul(&two, PREC, rm));
        let g = kk.pow(&big_ln2, PREC, rm, &mut hp.cc);
        let rhs = ct.div(&g.mul(&g, PREC, rm), PREC, rm).mul(&phi_k, PREC, rm);
        let res = Hp::to_f64(&phi_2k.sub(&rhs, PREC, rm).div(&phi_2k, PREC, rm).abs())?;
        let (pk, p2k) = ((-(k.ln().powi(2))).exp(), (-((2.0 * k).ln().powi(2))).exp());
        let rhs64 = 2f64.powf(-ln2) * k.powf(ln2).powi(2).recip() * pk;
        let res64 = ((p2k - rhs64) / p2k).abs();
        max_residual = max_residual.max(res);
        rows.push(IdentityRow { k, phi_k: Hp::to_f64(&phi_k)?, phi_2k: Hp::to_f64(&phi_2k)?, residual: res, residual_f64: res64 });
    }
    let grid = log_space(1.0, WITNESS_K_MAX, 601);
    let probes = lambdas
        .iter()
        .map(|&lambda| {
            let (k_at_max, log_max) = grid
                .iter()
                .map(|&k| (k, lambda * k - k.ln().powi(2)))
                .fold((1.0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
            LambdaProbe { lambda, k_at_max, log_max, exceeds_million: log_max > 1e6f64.ln() }
        })
        .collect();
    let growth_axioms = verify_axioms(&GrowthFunction::power(ln2)?, 10.0, 1000, 1e-12);
    Ok(WitnessBetaOneReport {
        c_tilde: 2f64.powf(-ln2),
        alpha: 2.0,
        rows,
        max_residual,
        probes,
        k_max: WITNESS_K_MAX,
        growth_axioms,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingRow {
    pub k: f64,
    /// `ln phi(2k) - ln((1/k^2)^alpha phi(k)^(3/2))`.
    pub log_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessBetaGtOneReport {
    pub alpha: f64,
    /// Smallest integer `k0 >= 1` with `k^(2 alpha) <= e^(k/2)` for all `k >= k0`.
    pub k0: f64,
    /// Real threshold, when requested.
    pub k0_real: Option<f64>,
    /// `(k0-1)^(2 alpha) > e^((k0-1)/2)`, or `k0 = 1`.
    pub fails_below: bool,
    /// `k/2 - 2 alpha ln k` is increasing for `k` beyond this point.
    pub increasing_from: f64,
    pub tail_certified: bool,
    pub rows: Vec<DoublingRow>,
    pub max_log_residual: f64,
    /// Smallest `ln phi(k) = -k` over the probed levels (finite means positive).
    pub min_log_phi: f64,
    pub phi_positive: bool,
}

fn gap(alpha: f64, k: f64) -> f64 {
    k / 2.0 - 2.0 * alpha * k.ln()
}

/// `phi(k) = e^(-k)` with `beta = 3/2`, `c_tilde = 1`, `g(k) = k^2`.
/// All checks run in log space since `e^(-k)` underflows past `k ~ 745`.
pub fn witness_beta_gt_one(alpha: f64, real_threshold: bool) -> Result<WitnessBetaGtOneReport> {
    require_positive("alpha", alpha)?;
    let turn = 4.0 * alpha;
    let k_real = if turn <= 1.0 || gap(alpha, turn) >= 0.0 {
        1.0
    } else {
        let (mut a, mut b) = (turn, 2.0 * turn);
        while gap(alpha, b) < 0.0 {
            a = b;
            b *= 2.0;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if gap(alpha, m) >= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        b
    };
    let mut k0 = k_real.ceil().max(1.0);
    while k0 > 1.0 && gap(alpha, k0 - 1.0) >= 0.0 && k0 - 1.0 >= turn {
        k0 -= 1.0;
    }
    while gap(alpha, k0) < 0.0 {
        k0 += 1.0;
    }
    let fails_below = k0 == 1.0 || gap(alpha, k0 - 1.0) < 0.0;
    let tail_pts = log_space(k0.max(turn), 1e3 * k0.max(turn), 301);
    let tail_certified = tail_pts.windows(2).all(|w| gap(alpha, w[1]) > gap(alpha, w[0]));
    let hi = 1e3f64.max(2.0 * k0);
    let rows: Vec<DoublingRow> = log_space(k0, hi, 100)
        .into_iter()
        .map(|k| DoublingRow { k, log_residual: -2.0 * k - (-2.0 * alpha * k.ln() - 1.5 * k) })
        .collect();
    let max_log_residual = rows.iter().map(|r| r.log_residual).fold(f64::NEG_INFINITY, f64::max);
    let min_log_phi = rows.iter().map(|r| -2.0 * r.k).fold(f64::INFINITY, f64::min);
    Ok(WitnessBetaGtOneReport {
        alpha,
        k0,
        k0_real: real_threshold.then_some(k_real),
        fails_below,
        increasing_from: turn,
        tail_certified,
        rows,
        max_log_residual,
        min_log_phi,
        phi_positive: min_log_phi.is_finite(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dp() -> DoublingParams {
        DoublingParams { c_tilde: 1.0, alpha: 1.0, beta: 0.5, k0: 1.0, growth: GrowthFunction::identity(), phi0: 1.0 }
    }

    #[test]
    fn forward_is_identity() {
        assert_eq!(equivalence_forward(1.0).unwrap(), 1.0);
        assert_eq!(equivalence_forward(7.5).unwrap(), 7.5);
        assert!(equivalence_forward(0.0).is_err());
    }

    #[test]
    fn backward_constant_example() {
        let b = equivalence_backward_constant(&dp()).unwrap();
        assert_eq!(b.c_case1, 4.0);
        assert!((b.c_bar - 1088.0).abs() < 1e-9);
        assert!((b.c - 1088f64.sqrt()).abs() < 1e-12);
        let bad = DoublingParams { beta: 1.0, ..dp() };
        assert!(matches!(equivalence_backward_constant(&bad), Err(Error::Parameter(_))));
    }

    #[test]
    fn doubling_grid_is_closed() {
        let p = doubling_envelope(&dp(), 4, 8).unwrap();
        for j in 8..p.levels.len() {
            assert_eq!(p.levels[j], 2.0 * p.levels[j - 8]);
        }
        assert_eq!(p.value(1.0), Some(1.0));
        assert_eq!(p.value(0.5), None);
    }

    #[test]
    fn beta_one_small_k() {
        let r = witness_beta_one(&[1.0], &[0.1]).unwrap();
        assert_eq!(r.rows[0].phi_k, 1.0);
        assert!((r.rows[0].phi_2k - 0.61850).abs() < 1e-5);
        assert!(r.rows[0].residual <= 1e-16);
        assert!(witness_beta_one(&[0.5], &[]).is_err());
        assert!(!r.growth_axioms.check("convexity").unwrap().passed);
    }

    #[test]
    fn beta_gt_one_alpha_one() {
        let r = witness_beta_gt_one(1.0, true).unwrap();
        assert_eq!(r.k0, 9.0);
        assert!(r.fails_below && r.tail_certified && r.phi_positive);
        assert!(r.max_log_residual <= 0.0);
        let kr = r.k0_real.unwrap();
        assert!(kr > 8.0 && kr <= 9.0);
        assert_eq!(witness_beta_gt_one(0.1, false).unwrap().k0, 1.0);
    }
}
