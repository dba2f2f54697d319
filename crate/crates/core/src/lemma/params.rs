use crate::error::{param, require_nonnegative, require_positive, Error, Result};
use crate::growth::{Conformance, GrowthFunction};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Recursion weight family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `c / (h-k)^alpha`
    Classical,
    /// `c h^(theta alpha) / (h-k)^alpha`
    #[serde(alias = "gzm", alias = "power_weighted", alias = "powerweighted")]
    PowerWeighted,
    /// `c h^(theta alpha) / g(h-k)^alpha`
    #[serde(alias = "first", alias = "first_generalized")]
    FirstGeneralized,
    /// `c g(h)^(theta alpha) / (h-k)^alpha`
    #[serde(alias = "second", alias = "second_generalized")]
    SecondGeneralized,
}

impl Variant {
    pub const ALL: [Variant; 4] =
        [Variant::Classical, Variant::PowerWeighted, Variant::FirstGeneralized, Variant::SecondGeneralized];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Classical => "classical",
            Variant::PowerWeighted => "power-weighted",
            Variant::FirstGeneralized => "first-generalized",
            Variant::SecondGeneralized => "second-generalized",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "classical" => Ok(Variant::Classical),
            "power-weighted" | "powerweighted" | "gzm" => Ok(Variant::PowerWeighted),
            "first-generalized" | "first" => Ok(Variant::FirstGeneralized),
            "second-generalized" | "second" => Ok(Variant::SecondGeneralized),
            other => Err(param(format!("unknown variant {other:?}"))),
        }
    }
}

/// How the engine reacts to a growth function that misses an assumption
/// needed by the selected branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxiomMode {
    #[default]
    Strict,
    Permissive,
}

/// The three regimes of the exponent `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `beta > 1`: the level function vanishes past a finite level.
    Superlinear,
    /// `beta = 1`: stretched-exponential decay.
    Linear,
    /// `beta < 1`: power decay.
    Sublinear,
}

impl Branch {
    pub fn of(beta: f64) -> Branch {
        if beta > 1.0 {
            Branch::Superlinear
        } else if beta == 1.0 {
            Branch::Linear
        } else {
            Branch::Sublinear
        }
    }
}

fn default_growth() -> GrowthFunction {
    GrowthFunction::identity()
}

/// One recursion hypothesis `phi(h) <= W(h, k) phi(k)^beta` for `h > k >= k0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaParams {
    pub variant: Variant,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub theta: f64,
    pub k0: f64,
    pub phi0: f64,
    #[serde(default = "default_growth")]
    pub growth: GrowthFunction,
    #[serde(default)]
    pub mode: AxiomMode,
}

impl LemmaParams {
    pub fn new(variant: Variant, c: f64, alpha: f64, beta: f64, theta: f64, k0: f64, phi0: f64) -> Self {
        Self { variant, c, alpha, beta, theta, k0, phi0, growth: GrowthFunction::identity(), mode: AxiomMode::Strict }
    }

    pub fn classical(c: f64, alpha: f64, beta: f64, k0: f64, phi0: f64) -> Self {
        Self::new(Variant::Classical, c, alpha, beta, 0.0, k0, phi0)
    }

    pub fn with_growth(mut self, g: GrowthFunction) -> Self {
        self.growth = g;
        self
    }

    pub fn with_mode(mut self, mode: AxiomMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn branch(&self) -> Branch {
        Branch::of(self.beta)
    }

    /// Basic positivity and sign checks shared by every variant.
    pub fn validate(&self) -> Result<()> {
        require_positive("c", self.c)?;
        require_positive("alpha", self.alpha)?;
        require_positive("beta", self.beta)?;
        require_nonnegative("theta", self.theta)?;
        require_nonnegative("phi0", self.phi0)?;
        if !self.k0.is_finite() {
            return Err(param(format!("k0 must be finite, got {}", self.k0)));
        }
        match self.variant {
            Variant::Classical => {
                if self.theta != 0.0 {
                    return Err(param("theta must be 0 for the classical variant"));
                }
            }
            _ => require_positive("k0", self.k0)?,
        }
        Ok(())
    }

    /// `ln W(h, k)` for `h > k >= k0`.
    #[inline]
    pub fn ln_weight(&self, h: f64, k: f64) -> f64 {
        let d = h - k;
        let ta = self.theta * self.alpha;
        let lc = self.c.ln();
        match self.variant {
            Variant::Classical => lc - self.alpha * d.ln(),
            Variant::PowerWeighted => lc + if ta == 0.0 { 0.0 } else { ta * h.ln() } - self.alpha * d.ln(),
            Variant::FirstGeneralized => {
                lc + if ta == 0.0 { 0.0 } else { ta * h.ln() } - self.alpha * self.growth.ln_value(d)
            }
            Variant::SecondGeneralized => {
                lc + if ta == 0.0 { 0.0 } else { ta * self.growth.ln_value(h) } - self.alpha * d.ln()
            }
        }
    }

    /// `W(h, k)`.
    pub fn weight(&self, h: f64, k: f64) -> f64 {
        self.ln_weight(h, k).exp()
    }

    /// Enforce the growth-function assumptions a branch relies on.
    /// Returns a note when permissive mode lets a violation through.
    pub(crate) fn require_growth(&self, needs: Conformance, what: &str) -> Result<Option<String>> {
        let have = self.growth.conformance();
        let mut missing = Vec::new();
        if needs.convex_monotone && !have.convex_monotone {
            missing.push("convexity/monotonicity");
        }
        if needs.doubling && !have.doubling {
            missing.push("doubling bound");
        }
        if needs.positive_slope_at_zero && !have.positive_slope_at_zero {
            missing.push("positive slope at 0");
        }
        if needs.positive_slope_at_zero && !self.growth.g_prime_at_zero().is_finite() {
            missing.push("finite slope at 0");
        }
        if missing.is_empty() {
            return Ok(None);
        }
        let msg = format!("{} lacks {} required by {what}", self.growth.name(), missing.join(", "));
        match self.mode {
            AxiomMode::Strict => Err(Error::Axiom(msg)),
            AxiomMode::Permissive => Ok(Some(format!("warning: {msg}"))),
        }
    }
}
