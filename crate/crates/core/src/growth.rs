//! Growth functions `g` used to weight the level recursions.
//!
//! A conforming `g` is C^1, convex, non-decreasing with `g(0) = 0`, positive
//! on `(0, inf)`, satisfies `g(lt) <= l^mu g(t)` for `l > 1`, and has
//! `g'(0+) > 0`. Non-conforming power witnesses can be built but carry
//! flags so the lemma engine can refuse them.

use crate::error::{Error, Result};
use crate::numeric::log_space;
use serde::{Deserialize, Serialize};
use std::f64::consts::E;

/// JSON form of a growth function: `{"kind": "loglinear"}` or
/// `{"kind": "power", "p": 1.5}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GrowthSpec {
    Identity,
    #[serde(alias = "log-linear", alias = "log_linear")]
    Loglinear,
    Power { p: f64 },
}

/// Which of the three structural assumptions a growth function meets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conformance {
    /// C^1, convex, non-decreasing, zero at the origin, positive elsewhere.
    pub convex_monotone: bool,
    /// Doubling bound with the stored exponent.
    pub doubling: bool,
    /// Strictly positive right derivative at the origin.
    pub positive_slope_at_zero: bool,
}

impl Conformance {
    pub fn all(&self) -> bool {
        self.convex_monotone && self.doubling && self.positive_slope_at_zero
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GrowthSpec", into = "GrowthSpec")]
pub struct GrowthFunction {
    spec: GrowthSpec,
    name: String,
    mu: f64,
    g_prime_at_zero: f64,
}

impl TryFrom<GrowthSpec> for GrowthFunction {
    type Error = Error;
    fn try_from(spec: GrowthSpec) -> Result<Self> {
        GrowthFunction::from_spec(spec)
    }
}

impl From<GrowthFunction> for GrowthSpec {
    fn from(g: GrowthFunction) -> Self {
        g.spec
    }
}

impl GrowthFunction {
    pub fn identity() -> Self {
        Self { spec: GrowthSpec::Identity, name: "identity".into(), mu: 1.0, g_prime_at_zero: 1.0 }
    }

    /// `g(t) = t ln(e + t)`, doubling exponent 2.
    pub fn loglinear() -> Self {
        Self { spec: GrowthSpec::Loglinear, name: "loglinear".into(), mu: 2.0, g_prime_at_zero: 1.0 }
    }

    /// `g(t) = t^p`. Exponents below 1 give concave witnesses; exponents
    /// above 1 have a vanishing slope at the origin.
    pub fn power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::Parameter(format!("power exponent must be finite and > 0, got {p}")));
        }
        let g0 = if p == 1.0 {
            1.0
        } else if p > 1.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Ok(Self { spec: GrowthSpec::Power { p }, name: format!("power({p})"), mu: p.max(1.0), g_prime_at_zero: g0 })
    }

    pub fn from_spec(spec: GrowthSpec) -> Result<Self> {
        match spec {
            GrowthSpec::Identity => Ok(Self::identity()),
            GrowthSpec::Loglinear => Ok(Self::loglinear()),
            GrowthSpec::Power { p } => Self::power(p),
        }
    }

    /// Parse the short names accepted on the command line:
    /// `identity`, `loglinear`, `power:<p>`.
    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Self::identity()),
            "loglinear" | "log-linear" => Ok(Self::loglinear()),
            _ => match s.strip_prefix("power:").or_else(|| s.strip_prefix("power=")) {
                Some(p) => {
                    let p: f64 = p.parse().map_err(|_| Error::Parameter(format!("bad power exponent in {s:?}")))?;
                    Self::power(p)
                }
                None => Err(Error::Parameter(format!("unknown growth function {s:?}"))),
            },
        }
    }

    pub fn spec(&self) -> GrowthSpec {
        self.spec
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn g_prime_at_zero(&self) -> f64 {
        self.g_prime_at_zero
    }

    pub fn conformance(&self) -> Conformance {
        match self.spec {
            GrowthSpec::Identity | GrowthSpec::Loglinear => {
                Conformance { convex_monotone: true, doubling: true, positive_slope_at_zero: true }
            }
            GrowthSpec::Power { p } => Conformance {
                convex_monotone: p >= 1.0,
                doubling: true,
                positive_slope_at_zero: p <= 1.0,
            },
        }
    }

    /// Checked evaluation.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain(format!("growth function argument must be finite and >= 0, got {t}")));
        }
        Ok(self.value(t))
    }

    /// Unchecked evaluation for `t >= 0`.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match self.spec {
            GrowthSpec::Identity => t,
            GrowthSpec::Loglinear => t * (E + t).ln(),
            GrowthSpec::Power { p } => {
                if p == 1.0 {
                    t
                } else {
                    t.powf(p)
                }
            }
        }
    }

    /// Analytic derivative for `t >= 0` (right derivative at 0).
    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        match self.spec {
            GrowthSpec::Identity => 1.0,
            GrowthSpec::Loglinear => (E + t).ln() + t / (E + t),
            GrowthSpec::Power { p } => {
                if t == 0.0 {
                    self.g_prime_at_zero
                } else if p == 1.0 {
                    1.0
                } else {
                    p * t.powf(p - 1.0)
                }
            }
        }
    }

    /// `ln g(t)` for `t > 0`.
    #[inline]
    pub fn ln_value(&self, t: f64) -> f64 {
        self.ln_value_at_ln(t.ln())
    }

    /// `ln g(e^y)`, stable for large `y`.
    pub fn ln_value_at_ln(&self, y: f64) -> f64 {
        match self.spec {
            GrowthSpec::Identity => y,
            GrowthSpec::Loglinear => {
                let ln_e_plus = if y > 1.0 { y + (1.0 - y).exp().ln_1p() } else { (E + y.exp()).ln() };
                y + ln_e_plus.ln()
            }
            GrowthSpec::Power { p } => p * y,
        }
    }

    /// `ln g'(t)` for `t > 0`.
    pub fn ln_derivative(&self, t: f64) -> f64 {
        match self.spec {
            GrowthSpec::Power { p } if p != 1.0 => p.ln() + (p - 1.0) * t.ln(),
            _ => self.derivative(t).ln(),
        }
    }
}

/// One axiom check inside an [`AxiomReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub name: String,
    pub passed: bool,
    /// Largest relative violation seen (0 when none).
    pub worst_violation: f64,
    /// Sample point(s) where the worst violation occurred.
    pub witness: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub growth: String,
    pub mu: f64,
    pub tol: f64,
    pub checks: Vec<AxiomCheck>,
    pub all_passed: bool,
    pub notes: Vec<String>,
}

impl AxiomReport {
    pub fn check(&self, name: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn violations(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

struct Tracker {
    name: &'static str,
    worst: f64,
    witness: Vec<f64>,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Self { name, worst: 0.0, witness: Vec::new() }
    }

    fn record(&mut self, violation: f64, at: &[f64]) {
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        if v > self.worst {
            self.worst = v;
            self.witness = at.to_vec();
        }
    }

    fn finish(self, tol: f64) -> AxiomCheck {
        AxiomCheck { name: self.name.into(), passed: self.worst <= tol, worst_violation: self.worst, witness: self.witness }
    }
}

/// Sampled check of the growth axioms and the two derived inequalities.
///
/// Pointwise checks use `sample_count` log-spaced points on
/// `[1e-6 t_max, t_max]`. The doubling bound is checked on a
/// `m x m` lattice (`m = ceil(sqrt(sample_count))`) of log-spaced
/// `lambda in (1, max(t_max, 2)]` and `t in (1, t_max]` (or
/// `(1e-3 t_max, t_max]` when `t_max <= 1`).
pub fn verify_axioms(gf: &GrowthFunction, t_max: f64, sample_count: usize, tol: f64) -> AxiomReport {
    let n = sample_count.max(3);
    let ts = log_space(t_max * 1e-6, t_max, n);
    let g: Vec<f64> = ts.iter().map(|&t| gf.value(t)).collect();
    let mu = gf.mu();

    let mut zero = Tracker::new("zero_at_origin");
    zero.record(gf.value(0.0).abs(), &[0.0]);

    let mut pos = Tracker::new("positivity");
    for (&t, &v) in ts.iter().zip(&g) {
        if !(v > 0.0) {
            pos.record(1.0, &[t]);
        }
    }

    let mut mono = Tracker::new("monotonicity");
    for i in 0..n - 1 {
        if g[i + 1] < g[i] {
            mono.record((g[i] - g[i + 1]) / g[i].abs().max(f64::MIN_POSITIVE), &[ts[i], ts[i + 1]]);
        }
    }

    let mut convex = Tracker::new("convexity");
    for i in 0..n - 2 {
        let s1 = (g[i + 1] - g[i]) / (ts[i + 1] - ts[i]);
        let s2 = (g[i + 2] - g[i + 1]) / (ts[i + 2] - ts[i + 1]);
        if s2 < s1 {
            let scale = s1.abs().max(s2.abs()).max(f64::MIN_POSITIVE);
            convex.record((s1 - s2) / scale, &[ts[i], ts[i + 1], ts[i + 2]]);
        }
    }

    let m = (n as f64).sqrt().ceil() as usize;
    let big = t_max.max(2.0);
    let t_lo = if t_max > 1.0 { 1.0 } else { t_max * 1e-3 };
    let lambdas: Vec<f64> = (1..=m).map(|j| big.powf(j as f64 / m as f64)).collect();
    let lat_t: Vec<f64> = (1..=m).map(|i| t_lo * (t_max / t_lo).powf(i as f64 / m as f64)).collect();
    let mut dbl = Tracker::new("doubling");
    for &l in &lambdas {
        let lm = l.powf(mu);
        for &t in &lat_t {
            let rhs = lm * gf.value(t);
            let lhs = gf.value(l * t);
            if lhs > rhs {
                dbl.record((lhs - rhs) / rhs, &[l, t]);
            }
        }
    }

    let mut slope0 = Tracker::new("positive_slope_at_zero");
    if !(gf.g_prime_at_zero() > 0.0) {
        slope0.record(1.0, &[0.0]);
    }

    let mut euler = Tracker::new("derivative_bound");
    for (&t, &v) in ts.iter().zip(&g) {
        let lhs = gf.derivative(t) * t;
        let rhs = mu * v;
        if lhs > rhs {
            euler.record((lhs - rhs) / rhs.max(f64::MIN_POSITIVE), &[t]);
        }
    }

    let mut pair = Tracker::new("derivative_pair_bound");
    let stride = (n / m).max(1);
    let sub: Vec<f64> = ts.iter().step_by(stride).copied().collect();
    for &t1 in &sub {
        let d1 = gf.derivative(t1);
        for &t2 in &sub {
            let lhs = d1 * t2;
            let rhs = d1 * t1 + gf.derivative(t2) * t2;
            if lhs > rhs {
                pair.record((lhs - rhs) / (1.0 + lhs), &[t1, t2]);
            }
        }
    }

    let checks: Vec<AxiomCheck> =
        [zero, pos, mono, convex, dbl, slope0, euler, pair].into_iter().map(|t| t.finish(tol)).collect();
    let all_passed = checks.iter().all(|c| c.passed);
    let mut notes = Vec::new();
    let conf = gf.conformance();
    if !conf.convex_monotone {
        notes.push("witness-only function: not convex on (0, inf)".to_string());
    }
    if !conf.positive_slope_at_zero {
        notes.push("right derivative at 0 vanishes".to_string());
    }
    AxiomReport { growth: gf.name().to_string(), mu, tol, checks, all_passed, notes }
}

/// Diagnostic estimate of the doubling exponent:
/// the lattice supremum of `ln(g(lt)/g(t)) / ln l`.
pub fn estimate_mu(gf: &GrowthFunction, t_max: f64, sample_count: usize) -> f64 {
    let m = (sample_count.max(4) as f64).sqrt().ceil() as usize;
    let big = t_max.max(2.0);
    let lambdas: Vec<f64> = (1..=m).map(|j| big.powf(j as f64 / m as f64)).collect();
    let ts = log_space(t_max * 1e-6, t_max, m);
    let mut best = f64::NEG_INFINITY;
    for &l in &lambdas {
        for &t in &ts {
            let r = (gf.ln_value(l * t) - gf.ln_value(t)) / l.ln();
            best = best.max(r);
        }
    }
    best
}
