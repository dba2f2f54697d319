use crate::error::{Error, Result};
use crate::growth::GrowthFunction;
use crate::lemma::params::{Branch, Variant};
use serde::{Deserialize, Serialize};

/// The three conclusion shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum DecayBound {
    /// `phi(k) = 0` for `k >= level`.
    Vanishes { level: f64 },
    /// `phi(k) <= phi0 exp(1 - ((k - k0)/tau)^power)` for `k >= k0`.
    StretchedExp { phi0: f64, k0: f64, tau: f64, power: f64 },
    /// `phi(k) <= constant * x^(-rate)` for `k >= k0`, with `x = g(k)` when
    /// `in_g` and `x = k` otherwise.
    PowerEnvelope { constant: f64, rate: f64, in_g: bool, k0: f64 },
}

impl DecayBound {
    /// Smallest level at which the bound carries information.
    pub fn start(&self) -> f64 {
        match *self {
            DecayBound::Vanishes { level } => level,
            DecayBound::StretchedExp { k0, .. } | DecayBound::PowerEnvelope { k0, .. } => k0,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            DecayBound::Vanishes { .. } => "vanishes",
            DecayBound::StretchedExp { .. } => "stretched_exp",
            DecayBound::PowerEnvelope { .. } => "power_envelope",
        }
    }
}

/// A bound together with the formula that produced it and any notes
/// (permissive-mode warnings, trusted hints, certification steps).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conclusion {
    pub variant: Variant,
    pub branch: Branch,
    pub bound: DecayBound,
    pub formula: String,
    pub notes: Vec<String>,
}

/// Envelope value of `b` at `k`.
///
/// `Vanishes` returns `+inf` below its level (no information) and 0 from
/// the level on.
pub fn eval_bound(b: &DecayBound, gf: &GrowthFunction, k: f64) -> Result<f64> {
    if !k.is_finite() {
        return Err(Error::Domain(format!("level must be finite, got {k}")));
    }
    match *b {
        DecayBound::Vanishes { level } => Ok(if k >= level { 0.0 } else { f64::INFINITY }),
        DecayBound::StretchedExp { phi0, k0, .. } | DecayBound::PowerEnvelope { constant: phi0, k0, .. } => {
            if k < k0 {
                return Err(Error::Range(format!("level {k} is below the bound's start {k0}")));
            }
            if phi0 == 0.0 {
                return Ok(0.0);
            }
            Ok(ln_eval_bound(b, gf, k)?.exp())
        }
    }
}

/// Natural log of [`eval_bound`] (`-inf` for a zero bound).
pub fn ln_eval_bound(b: &DecayBound, gf: &GrowthFunction, k: f64) -> Result<f64> {
    if !k.is_finite() {
        return Err(Error::Domain(format!("level must be finite, got {k}")));
    }
    match *b {
        DecayBound::Vanishes { level } => Ok(if k >= level { f64::NEG_INFINITY } else { f64::INFINITY }),
        DecayBound::StretchedExp { phi0, k0, tau, power } => {
            if k < k0 {
                return Err(Error::Range(format!("level {k} is below the bound's start {k0}")));
            }
            Ok(phi0.ln() + 1.0 - ((k - k0) / tau).powf(power))
        }
        DecayBound::PowerEnvelope { constant, rate, in_g, k0 } => {
            if k < k0 {
                return Err(Error::Range(format!("level {k} is below the bound's start {k0}")));
            }
            let lx = if in_g { gf.ln_value(k) } else { k.ln() };
            Ok(constant.ln() - rate * lx)
        }
    }
}
