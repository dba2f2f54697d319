//! Distribution functions of discrete fields, weak-Lebesgue quasi-norms,
//! decay classification and the predicted regularity regimes.

use crate::error::{applicability, param, require_positive, Error, Result};
use crate::growth::GrowthFunction;
use crate::numeric::{linear_fit, LinearFit};
use serde::{Deserialize, Serialize};

/// Samples of `k -> |{|u| > k}|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionProfile {
    pub levels: Vec<f64>,
    pub measures: Vec<f64>,
    pub total_measure: f64,
    /// Measure of one cell; 0 for synthetic profiles.
    pub cell_volume: f64,
}

impl DistributionProfile {
    /// Profile from explicit samples (no cell structure).
    pub fn from_samples(levels: Vec<f64>, measures: Vec<f64>, total_measure: f64) -> Result<Self> {
        if levels.len() != measures.len() {
            return Err(param("levels and measures must have the same length"));
        }
        check_levels(&levels)?;
        if measures.iter().any(|m| !(m.is_finite() && *m >= 0.0 && *m <= total_measure)) {
            return Err(param("measures must lie in [0, total_measure]"));
        }
        if measures.windows(2).any(|w| w[1] > w[0]) {
            return Err(param("measures must be non-increasing"));
        }
        Ok(Self { levels, measures, total_measure, cell_volume: 0.0 })
    }
}

fn check_levels(levels: &[f64]) -> Result<()> {
    if levels.iter().any(|l| !l.is_finite()) || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(param("levels must be finite and strictly increasing"));
    }
    Ok(())
}

/// `measures[j] = cell_volume * #{i : |field[i]| > levels[j]}`.
pub fn distribution_function(field: &[f64], cell_volume: f64, levels: &[f64]) -> Result<DistributionProfile> {
    if field.is_empty() {
        return Err(Error::Domain("field is empty".into()));
    }
    require_positive("cell_volume", cell_volume)?;
    check_levels(levels)?;
    let mut abs: Vec<f64> = field.iter().map(|v| v.abs()).collect();
    if abs.iter().any(|v| v.is_nan()) {
        return Err(Error::Domain("field contains NaN".into()));
    }
    abs.sort_by(f64::total_cmp);
    let n = abs.len();
    let measures = levels
        .iter()
        .map(|&k| (n - abs.partition_point(|&v| v <= k)) as f64 * cell_volume)
        .collect();
    Ok(DistributionProfile { levels: levels.to_vec(), measures, total_measure: n as f64 * cell_volume, cell_volume })
}

/// `sup_j x_j^m measures[j]` with `x_j = levels[j]` or `g(levels[j])`.
pub fn weak_quasi_norm(prof: &DistributionProfile, m: f64, gf: Option<&GrowthFunction>) -> Result<f64> {
    require_positive("m", m)?;
    let mut best: f64 = 0.0;
    for (&k, &mu) in prof.levels.iter().zip(&prof.measures) {
        if mu == 0.0 || k <= 0.0 {
            continue;
        }
        let x = match gf {
            Some(g) => g.value(k),
            None => k,
        };
        best = best.max(x.powf(m) * mu);
    }
    Ok(best)
}

/// Decay classes, strongest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum DecayClass {
    /// `|u| <= level` almost everywhere (`None` when only predicted).
    Bounded { level: Option<f64> },
    /// `exp(lambda |u|^rho)` integrable. `open` marks a supremal exponent
    /// that is itself excluded.
    ExpIntegrable { lambda: Option<f64>, rho: f64, open: bool },
    /// `|{x : |u| > k}| <~ x^(-exponent)` with `x = g(k)` when
    /// `composed_with_g`.
    WeakLebesgue { exponent: f64, quasi_norm: Option<f64>, composed_with_g: bool, open: bool },
    Unclassified { diagnostics: String },
}

impl DecayClass {
    pub fn tag(&self) -> &'static str {
        match self {
            DecayClass::Bounded { .. } => "bounded",
            DecayClass::ExpIntegrable { .. } => "exp_integrable",
            DecayClass::WeakLebesgue { .. } => "weak_lebesgue",
            DecayClass::Unclassified { .. } => "unclassified",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// Largest accepted `max |residual| / spread(y)` of a line fit.
    pub max_fit_residual: f64,
    pub min_levels: usize,
    /// Levels whose measure is below this many cells are ignored.
    pub min_cells: f64,
    /// Largest accepted fitted `rho` (1 plus fit tolerance).
    pub rho_max: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self { max_fit_residual: 0.1, min_levels: 8, min_cells: 4.0, rho_max: 1.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: DecayClass,
    pub usable_levels: usize,
    /// Fit of `ln(1 - ln(phi/phi_first))` against `ln k`.
    pub exp_fit: Option<LinearFit>,
    /// Fit of `ln phi` against `ln g(k)`.
    pub weak_fit: Option<LinearFit>,
}

/// Classify a profile: bounded, then exponentially integrable, then weak
/// Lebesgue (in `g`); the first test that passes wins.
pub fn classify_decay(prof: &DistributionProfile, gf: &GrowthFunction, cfg: &ClassifierConfig) -> Result<Classification> {
    let resolved = cfg.min_cells * prof.cell_volume;
    if let Some(first_zero) = prof.measures.iter().position(|&m| m == 0.0) {
        return Ok(Classification {
            class: DecayClass::Bounded { level: Some(prof.levels[first_zero].max(0.0)) },
            usable_levels: first_zero,
            exp_fit: None,
            weak_fit: None,
        });
    }

    let usable: Vec<(f64, f64)> = prof
        .levels
        .iter()
        .zip(&prof.measures)
        .filter(|&(&k, &m)| k > 0.0 && m > 0.0 && m >= resolved)
        .map(|(&k, &m)| (k, m))
        .collect();
    if usable.len() < cfg.min_levels {
        return Err(Error::InsufficientData(format!(
            "{} usable levels, need at least {}",
            usable.len(),
            cfg.min_levels
        )));
    }
    let phi_first = usable[0].1;
    let lk: Vec<f64> = usable.iter().map(|p| p.0.ln()).collect();
    let y_exp: Vec<f64> = usable.iter().map(|p| (1.0 - (p.1 / phi_first).ln()).ln()).collect();
    let exp_fit = linear_fit(&lk, &y_exp).ok();
    let lg: Vec<f64> = usable.iter().map(|p| gf.ln_value(p.0)).collect();
    let y_weak: Vec<f64> = usable.iter().map(|p| p.1.ln()).collect();
    let weak_fit = linear_fit(&lg, &y_weak).ok();

    let mut class = None;
    if let Some(f) = exp_fit {
        if f.slope > 0.0 && f.slope <= cfg.rho_max && f.max_rel_residual <= cfg.max_fit_residual {
            class = Some(DecayClass::ExpIntegrable { lambda: Some(f.intercept.exp()), rho: f.slope, open: false });
        }
    }
    if class.is_none() {
        if let Some(f) = weak_fit {
            if f.slope < 0.0 && f.max_rel_residual <= cfg.max_fit_residual {
                let exponent = -f.slope;
                let sub = DistributionProfile {
                    levels: usable.iter().map(|p| p.0).collect(),
                    measures: usable.iter().map(|p| p.1).collect(),
                    total_measure: prof.total_measure,
                    cell_volume: prof.cell_volume,
                };
                let quasi_norm = weak_quasi_norm(&sub, exponent, Some(gf)).ok();
                class = Some(DecayClass::WeakLebesgue { exponent, quasi_norm, composed_with_g: true, open: false });
            }
        }
    }
    let class = class.unwrap_or_else(|| DecayClass::Unclassified {
        diagnostics: format!(
            "exp fit slope {:?} residual {:?}; weak fit slope {:?} residual {:?}",
            exp_fit.map(|f| f.slope),
            exp_fit.map(|f| f.max_rel_residual),
            weak_fit.map(|f| f.slope),
            weak_fit.map(|f| f.max_rel_residual)
        ),
    });
    Ok(Classification { class, usable_levels: usable.len(), exp_fit, weak_fit })
}

/// Parameters of the two application regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub n: usize,
    pub p: f64,
    pub sigma_or_m: f64,
    #[serde(default)]
    pub theta_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    Variational,
    DegeneratePde,
}

/// Relative tolerance for landing exactly on a critical exponent.
pub const CRITICAL_REL_TOL: f64 = 1e-12;

/// The decay class asserted by the regularity theorems.
pub fn predicted_regime(spec: &RegimeSpec, kind: RegimeKind) -> Result<DecayClass> {
    let n = spec.n as f64;
    let s = spec.sigma_or_m;
    if !s.is_finite() {
        return Err(param("sigma_or_m must be finite"));
    }
    match kind {
        RegimeKind::Variational => {
            if !(spec.p > 1.0 && spec.p < n) {
                return Err(applicability(format!("need 1 < p < n, got p = {} with n = {}", spec.p, spec.n)));
            }
            if !(s > 1.0) {
                return Err(applicability(format!("need sigma > 1, got {s}")));
            }
            let crit = n / spec.p;
            if (s - crit).abs() <= CRITICAL_REL_TOL * crit {
                Ok(DecayClass::ExpIntegrable { lambda: None, rho: 1.0, open: false })
            } else if s > crit {
                Ok(DecayClass::Bounded { level: None })
            } else {
                let e = n * spec.p * s / (n - spec.p * s);
                Ok(DecayClass::WeakLebesgue { exponent: e, quasi_norm: None, composed_with_g: true, open: false })
            }
        }
        RegimeKind::DegeneratePde => {
            if spec.n <= 2 {
                return Err(applicability(format!("need n > 2, got {}", spec.n)));
            }
            let t = spec.theta_deg;
            if !(0.0..1.0).contains(&t) {
                return Err(applicability(format!("need 0 <= theta < 1, got {t}")));
            }
            let floor = 2.0 * n / (n + 2.0);
            if !(s > floor) {
                return Err(applicability(format!("need m > 2n/(n+2) = {floor}, got {s}")));
            }
            let crit = n / 2.0;
            if (s - crit).abs() <= CRITICAL_REL_TOL * crit {
                if 2.0 * t >= 1.0 {
                    return Err(applicability(format!("critical case needs mu*theta < 1 with mu = 2, got theta = {t}")));
                }
                Ok(DecayClass::ExpIntegrable { lambda: None, rho: 1.0 - t, open: true })
            } else if s > crit {
                Ok(DecayClass::Bounded { level: None })
            } else {
                let e = n * s / (n - 2.0 * s) * (1.0 - t);
                Ok(DecayClass::WeakLebesgue { exponent: e, quasi_norm: None, composed_with_g: true, open: true })
            }
        }
    }
}
