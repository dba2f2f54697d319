use crate::envelope::{extremal_envelope, LevelGrid};
use crate::error::{applicability, param, Result};
use crate::growth::{Conformance, GrowthFunction};
use crate::lemma::bound::{Conclusion, DecayBound};
use crate::lemma::params::{Branch, LemmaParams, Variant};
use crate::numeric::{maximize_on_log_grid, smallest_satisfying, tail_strictly_decreasing};
use std::f64::consts::{E, LN_2};

const REL_TOL: f64 = 1e-12;
const PROBE_DECADES: u32 = 5;
const PROBE_PER_DECADE: u32 = 10;
const SUP_SPAN: f64 = 1e6;

const G1G2: Conformance = Conformance { convex_monotone: true, doubling: true, positive_slope_at_zero: false };
const G1G2G3: Conformance = Conformance { convex_monotone: true, doubling: true, positive_slope_at_zero: true };

/// Numerical probe of `L^theta / g(L) -> 0`: the ratio must be strictly
/// decreasing over five decades from `max(k0, 1)`.
pub fn limit_condition_holds(gf: &GrowthFunction, theta: f64, k0: f64) -> bool {
    tail_strictly_decreasing(|l| theta * l.ln() - gf.ln_value(l), k0.max(1.0), PROBE_DECADES, PROBE_PER_DECADE)
}

fn start(p: &LemmaParams, formula: &str) -> Conclusion {
    Conclusion {
        variant: p.variant,
        branch: p.branch(),
        bound: DecayBound::Vanishes { level: f64::NAN },
        formula: formula.into(),
        notes: Vec::new(),
    }
}

fn push(notes: &mut Vec<String>, n: Option<String>) {
    if let Some(n) = n {
        notes.push(n);
    }
}

/// Bounds for the weight `c h^(theta alpha) / g(h-k)^alpha`.
///
/// When `beta = 1` and no `tau_hint` is given, the scale `tau` is the
/// smallest value above the closed-form lower bound for which the extremal
/// envelope on `{k0, k0 + tau}` already sits below `phi0 / e`.
pub fn first_gen_bound(p: &LemmaParams, tau_hint: Option<f64>) -> Result<Conclusion> {
    if p.variant != Variant::FirstGeneralized {
        return Err(param(format!("first_gen_bound called with variant {}", p.variant)));
    }
    p.validate()?;
    let (c, a, b, t) = (p.c, p.alpha, p.beta, p.theta);
    let g = &p.growth;
    let mu = g.mu();
    match p.branch() {
        Branch::Superlinear => {
            let mut out = start(p, "first-generalized.superlinear");
            push(&mut out.notes, p.require_growth(G1G2, "the vanishing branch")?);
            if !limit_condition_holds(g, t, p.k0) {
                return Err(applicability(format!("L^{t}/g(L) is not decreasing to 0 for g = {}", g.name())));
            }
            let l = if p.phi0 == 0.0 {
                2.0 * p.k0
            } else {
                let rhs = c.ln() / a + (b - 1.0) / a * p.phi0.ln() + (mu * b + t + mu / (b - 1.0)) / b * LN_2;
                smallest_satisfying(|l| g.ln_value(l) - t * l.ln() >= rhs, 2.0 * p.k0, REL_TOL)?
            };
            out.bound = DecayBound::Vanishes { level: 2.0 * l };
            Ok(out)
        }
        Branch::Linear => {
            let mut out = start(p, "first-generalized.linear");
            if t >= 1.0 {
                return Err(applicability(format!("stretched-exponential branch needs theta < 1, got {t}")));
            }
            push(&mut out.notes, p.require_growth(G1G2G3, "the stretched-exponential branch")?);
            if !limit_condition_holds(g, t, p.k0) {
                return Err(applicability(format!("L^{t}/g(L) is not decreasing to 0 for g = {}", g.name())));
            }
            let ot = 1.0 - t;
            let closed = ((c * E).powf(1.0 / a) * 2f64.powf((2.0 - t) * t / ot) * ot / g.g_prime_at_zero()).powf(1.0 / ot);
            let lower = p.k0.max(closed);
            let tau = match tau_hint {
                Some(h) => {
                    if !(h.is_finite() && h > 0.0) {
                        return Err(param(format!("tau_hint must be finite and > 0, got {h}")));
                    }
                    out.notes.push(format!("tau_hint {h} trusted without certification"));
                    lower.max(h)
                }
                None => {
                    let target = p.phi0 / E;
                    let tau = smallest_satisfying(
                        |tau| {
                            LevelGrid::from_levels(vec![p.k0, p.k0 + tau])
                                .and_then(|grid| extremal_envelope(p, &grid))
                                .map(|prof| prof.values[1] <= target)
                                .unwrap_or(false)
                        },
                        lower,
                        REL_TOL,
                    )?;
                    out.notes.push(format!("tau certified against the two-level extremal envelope at k0 + {tau}"));
                    tau
                }
            };
            out.bound = DecayBound::StretchedExp { phi0: p.phi0, k0: p.k0, tau, power: ot };
            Ok(out)
        }
        Branch::Sublinear => {
            let mut out = start(p, "first-generalized.sublinear");
            if t >= 1.0 {
                return Err(applicability(format!("power branch needs theta < 1, got {t}")));
            }
            push(&mut out.notes, p.require_growth(G1G2G3, "the power branch")?);
            let (ot, om) = (1.0 - t, 1.0 - b);
            let pre = 2f64.powf(mu * a * ot * (2.0 - b) / (om * om));
            let first = (c * 2f64.powf(t * a) / g.g_prime_at_zero().powf(t * a)).powf(1.0 / om);
            let second = g.value(p.k0).powf(ot * a / om) * p.phi0;
            out.bound = DecayBound::PowerEnvelope { constant: pre * (first + second), rate: ot * a / om, in_g: true, k0: p.k0 };
            Ok(out)
        }
    }
}

/// Bounds for the weight `c g(h)^(theta alpha) / (h-k)^alpha`.
///
/// `theta_tilde` (only for `beta = 1`) defaults to `(theta + 1)/2`; if the
/// growth guard fails at that default and `mu theta < 1`, the midpoint
/// `(theta + 1/mu)/2` is tried. `eps0` (only for `beta < 1`) defaults to
/// `(1 - theta)/2`.
pub fn second_gen_bound(p: &LemmaParams, theta_tilde: Option<f64>, eps0: Option<f64>) -> Result<Conclusion> {
    if p.variant != Variant::SecondGeneralized {
        return Err(param(format!("second_gen_bound called with variant {}", p.variant)));
    }
    p.validate()?;
    let (c, a, b, t) = (p.c, p.alpha, p.beta, p.theta);
    let g = &p.growth;
    let mu = g.mu();
    let probe_from = p.k0.max(1.0);
    match p.branch() {
        Branch::Superlinear => {
            let mut out = start(p, "second-generalized.superlinear");
            push(&mut out.notes, p.require_growth(G1G2, "the vanishing branch")?);
            let guard = |l: f64| t * g.ln_value(l) - l.ln();
            if !tail_strictly_decreasing(guard, probe_from, PROBE_DECADES, PROBE_PER_DECADE) {
                return Err(applicability(format!("g^{t}(L)/L is not decreasing to 0 for g = {}", g.name())));
            }
            let l = if p.phi0 == 0.0 {
                2.0 * p.k0
            } else {
                let rhs = -c.ln() / a - (mu * t + b + 1.0 / (b - 1.0)) / b * LN_2 + (1.0 - b) / a * p.phi0.ln();
                smallest_satisfying(|l| guard(l) <= rhs, 2.0 * p.k0, REL_TOL)?
            };
            out.bound = DecayBound::Vanishes { level: 2.0 * l };
            Ok(out)
        }
        Branch::Linear => {
            let mut out = start(p, "second-generalized.linear");
            push(&mut out.notes, p.require_growth(G1G2, "the stretched-exponential branch")?);
            if mu * t >= 1.0 {
                return Err(applicability(format!("stretched-exponential branch needs mu*theta < 1, got {}", mu * t)));
            }
            let guard_ok = |tt: f64| {
                tail_strictly_decreasing(|l| tt * g.ln_value(l) - l.ln(), probe_from, PROBE_DECADES, PROBE_PER_DECADE)
            };
            let tt = match theta_tilde {
                Some(tt) => {
                    if !(tt.is_finite() && tt > t) {
                        return Err(param(format!("theta_tilde must exceed theta = {t}, got {tt}")));
                    }
                    if !guard_ok(tt) {
                        return Err(applicability(format!("g^{tt}(L)/L is not decreasing to 0 for g = {}", g.name())));
                    }
                    tt
                }
                None => {
                    let first = (t + 1.0) / 2.0;
                    let second = (t + 1.0 / mu) / 2.0;
                    if guard_ok(first) {
                        first
                    } else if guard_ok(second) {
                        out.notes.push(format!("default theta_tilde {first} fails the growth guard; using {second}"));
                        second
                    } else {
                        return Err(applicability(format!("no default theta_tilde passes the growth guard for g = {}", g.name())));
                    }
                }
            };
            let tau = if t == 0.0 {
                let tau_min = p.k0.max(0.5).max((c * E).powf(1.0 / a) * (1.0 + REL_TOL));
                smallest_satisfying(|tau| c.ln() - a * tau.ln() <= -1.0, tau_min, REL_TOL)?
            } else {
                let q = tt / (tt - t);
                let slope = t / (tt - t);
                let ln_f = |s: f64| t * g.ln_value_at_ln(q * s.ln()) - slope * s.ln();
                let upper = SUP_SPAN * p.k0.max(1.0);
                if !tail_strictly_decreasing(ln_f, upper, PROBE_DECADES, PROBE_PER_DECADE) {
                    return Err(applicability("supremum over s >= 1 is not attained below the probe range"));
                }
                let (_, grid_max) = maximize_on_log_grid(ln_f, 1.0, upper, 40);
                let int_max = (1..=2000).map(|s| ln_f(s as f64)).fold(f64::NEG_INFINITY, f64::max);
                let ln_m = grid_max.max(int_max);
                let ln_tau2 = (c.ln() + mu * t * a * (q + 1.0) * LN_2 - a * q.ln() + a * ln_m + 1.0) / ((1.0 - mu * t) * a);
                let tau_min = p.k0.max(0.5).max(ln_tau2.exp() * (1.0 + REL_TOL));
                out.notes.push(format!("theta_tilde = {tt}, ln sup = {ln_m}"));
                smallest_satisfying(
                    |tau| c.ln() + t * a * g.ln_value(p.k0 + tau) - a * tau.ln() <= -1.0,
                    tau_min,
                    REL_TOL,
                )?
            };
            out.bound = DecayBound::StretchedExp { phi0: p.phi0, k0: p.k0, tau, power: 1.0 - t / tt };
            Ok(out)
        }
        Branch::Sublinear => {
            let mut out = start(p, "second-generalized.sublinear");
            if t >= 1.0 {
                return Err(applicability(format!("power branch needs theta < 1, got {t}")));
            }
            push(&mut out.notes, p.require_growth(G1G2, "the power branch")?);
            let e0 = eps0.unwrap_or((1.0 - t) / 2.0);
            if !(e0 > 0.0 && e0 < 1.0 - t) {
                return Err(param(format!("eps0 must lie in (0, {}), got {e0}", 1.0 - t)));
            }
            let expo = 1.0 - t - e0;
            let ln_ratio = |k: f64| g.ln_derivative(k) - expo * g.ln_value(k);
            let upper = SUP_SPAN * p.k0;
            if !tail_strictly_decreasing(ln_ratio, upper, PROBE_DECADES, PROBE_PER_DECADE) {
                return Err(applicability(format!("g'(k)/g^{expo}(k) is not decreasing to 0 for g = {}", g.name())));
            }
            let (_, ln_max) = maximize_on_log_grid(ln_ratio, p.k0, upper, 40);
            let ln_t = c.ln() + mu * t * a * LN_2 + a * ln_max;
            let om = 1.0 - b;
            let pre = 2f64.powf(mu * e0 * a * (2.0 - b) / (om * om));
            let constant = pre * ((ln_t / om).exp() + p.phi0 * g.value(p.k0).powf(e0 * a / om));
            out.notes.push(format!("eps0 = {e0}, T = {}", ln_t.exp()));
            out.bound = DecayBound::PowerEnvelope { constant, rate: e0 * a / om, in_g: true, k0: p.k0 };
            Ok(out)
        }
    }
}
