use crate::error::{applicability, param, Result};
use crate::lemma::bound::{Conclusion, DecayBound};
use crate::lemma::params::{Branch, LemmaParams, Variant};
use std::f64::consts::{E, LN_2};

fn conclusion(p: &LemmaParams, bound: DecayBound, formula: &str) -> Conclusion {
    Conclusion { variant: p.variant, branch: p.branch(), bound, formula: formula.into(), notes: Vec::new() }
}

/// Bounds for the weight `c / (h-k)^alpha`.
pub fn classical_bound(p: &LemmaParams) -> Result<Conclusion> {
    if p.variant != Variant::Classical {
        return Err(param(format!("classical_bound called with variant {}", p.variant)));
    }
    p.validate()?;
    let (c, a, b) = (p.c, p.alpha, p.beta);
    match p.branch() {
        Branch::Superlinear => {
            let d = if p.phi0 == 0.0 {
                0.0
            } else {
                ((c.ln() + (b - 1.0) * p.phi0.ln() + a * b / (b - 1.0) * LN_2) / a).exp()
            };
            Ok(conclusion(p, DecayBound::Vanishes { level: p.k0 + d }, "classical.superlinear"))
        }
        Branch::Linear => {
            let tau = (c * E).powf(1.0 / a);
            Ok(conclusion(p, DecayBound::StretchedExp { phi0: p.phi0, k0: p.k0, tau, power: 1.0 }, "classical.linear"))
        }
        Branch::Sublinear => {
            if p.k0 <= 0.0 {
                return Err(param("k0 must be > 0 when beta < 1"));
            }
            let om = 1.0 - b;
            let constant =
                2f64.powf(a / (om * om)) * (c.powf(1.0 / om) + (2.0 * p.k0).powf(a / om) * p.phi0);
            Ok(conclusion(
                p,
                DecayBound::PowerEnvelope { constant, rate: a / om, in_g: false, k0: p.k0 },
                "classical.sublinear",
            ))
        }
    }
}

/// Bounds for the weight `c h^(theta alpha) / (h-k)^alpha`, `0 <= theta < 1`.
pub fn gzm_bound(p: &LemmaParams) -> Result<Conclusion> {
    if p.variant != Variant::PowerWeighted {
        return Err(param(format!("gzm_bound called with variant {}", p.variant)));
    }
    p.validate()?;
    let (c, a, b, t) = (p.c, p.alpha, p.beta, p.theta);
    if t >= 1.0 {
        return Err(applicability(format!("power-weighted recursion needs theta < 1, got {t}")));
    }
    let ot = 1.0 - t;
    match p.branch() {
        Branch::Superlinear => {
            let l = if p.phi0 == 0.0 {
                2.0 * p.k0
            } else {
                let ln_l = c.ln() / (ot * a)
                    + (b - 1.0) / (ot * a) * p.phi0.ln()
                    + (b + t + 1.0 / (b - 1.0)) / (ot * b) * LN_2;
                (2.0 * p.k0).max(ln_l.exp())
            };
            Ok(conclusion(p, DecayBound::Vanishes { level: 2.0 * l }, "power-weighted.superlinear"))
        }
        Branch::Linear => {
            let e1 = 1.0 / (ot * a);
            let t2 = (c * E * 2f64.powf(t * a)).powf(e1);
            let t3 = (c * E * 2f64.powf((2.0 - t) * t * a / ot) * ot.powf(a)).powf(e1);
            let tau = p.k0.max(t2).max(t3);
            Ok(conclusion(
                p,
                DecayBound::StretchedExp { phi0: p.phi0, k0: p.k0, tau, power: ot },
                "power-weighted.linear",
            ))
        }
        Branch::Sublinear => {
            let om = 1.0 - b;
            let pre = 2f64.powf(ot * a / (om * om));
            let c2 = pre * ((c * 2f64.powf(t * a)).powf(1.0 / om) + (2.0 * p.k0).powf(ot * a / om) * p.phi0);
            let c1 = (4f64.powf(ot * a) * c * 2f64.powf(t * a)).max(c2.powf(om));
            let constant = pre * ((c1 * 2f64.powf(t * a)).powf(1.0 / om) + (2.0 * p.k0).powf(ot * a / om) * p.phi0);
            Ok(conclusion(
                p,
                DecayBound::PowerEnvelope { constant, rate: a * ot / om, in_g: false, k0: p.k0 },
                "power-weighted.sublinear",
            ))
        }
    }
}
