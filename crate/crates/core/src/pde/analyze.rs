use super::picard::{solve_picard, PdeSolution};
use super::problem::{PdeProblem, SourceSpec};
use crate::error::{param, Result};
use crate::growth::GrowthFunction;
use crate::levelset::{
    classify_decay, distribution_function, predicted_regime, ClassifierConfig, DecayClass, DistributionProfile,
    RegimeKind, RegimeSpec,
};
use crate::numeric::{log_space, LinearFit};
use serde::{Deserialize, Serialize};

/// Number of log-spaced analysis levels.
pub const ANALYSIS_LEVELS: usize = 64;
/// Largest relative change of `max|u|` accepted as resolution-stable.
pub const STABILITY_TOL: f64 = 0.10;
/// Band around the open exponent bound that is reported as "close".
pub const EXPONENT_BAND: f64 = 0.35;

/// `max|u|` on the given grid against the grid with `(N+1)/2` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxStability {
    pub coarse_resolution: usize,
    pub coarse_max: f64,
    pub fine_max: f64,
    pub relative_change: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentComparison {
    pub measured: f64,
    pub bound: f64,
    pub open: bool,
    pub below_bound: bool,
    /// `|measured - bound| / bound`.
    pub relative_gap: f64,
    pub within_band: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeAnalysis {
    pub measured: DecayClass,
    /// `None` when the source lies outside every regime (message in `notes`).
    pub predicted: Option<DecayClass>,
    pub agreement: bool,
    pub exponent: Option<ExponentComparison>,
    pub stability: Option<MaxStability>,
    pub exp_fit: Option<LinearFit>,
    pub weak_fit: Option<LinearFit>,
    pub profile: DistributionProfile,
    pub max_abs: f64,
    pub notes: Vec<String>,
}

/// Companion grid for the stability check, if one exists.
pub fn coarse_resolution(r: usize) -> Option<usize> {
    let c = r.div_ceil(2);
    (c >= 9 && c % 2 == 1).then_some(c)
}

/// Levels from the 10th percentile of `|u|` to its maximum.
pub fn analysis_levels(field: &[f64]) -> Vec<f64> {
    let mut abs: Vec<f64> = field.iter().map(|v| v.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let hi = *abs.last().unwrap_or(&0.0);
    let lo = abs[abs.len() / 10];
    let lo = if lo > 0.0 { lo } else { abs.iter().copied().find(|&v| v > 0.0).unwrap_or(hi) };
    if hi <= 0.0 {
        return vec![0.0];
    }
    if lo >= hi {
        return vec![hi];
    }
    log_space(lo, hi, ANALYSIS_LEVELS)
}

fn predicted_for(prob: &PdeProblem) -> Result<DecayClass> {
    match &prob.source {
        SourceSpec::Zero => Ok(DecayClass::Bounded { level: Some(0.0) }),
        SourceSpec::Constant { .. } => Ok(DecayClass::Bounded { level: None }),
        SourceSpec::RadialSingular { m_target, .. } => predicted_regime(
            &RegimeSpec { n: prob.n, p: 2.0, sigma_or_m: *m_target, theta_deg: prob.theta_deg },
            RegimeKind::DegeneratePde,
        ),
    }
}

/// Solve the companion problem on the coarse grid with default tolerances.
pub fn analyze_solution(sol: &PdeSolution, prob: &PdeProblem) -> Result<PdeAnalysis> {
    let companion = match coarse_resolution(prob.grid_points_per_axis) {
        Some(c) if sol.max_abs > 0.0 => Some(solve_picard(&prob.with_resolution(c), 1e-8, 1e-10, 500)?),
        _ => None,
    };
    analyze_with_companion(sol, prob, companion.as_ref(), &ClassifierConfig::default())
}

/// Classify `sol`. Every discrete field is bounded, so `Bounded` is reported
/// only when `max|u|` is stable against `companion`; otherwise the profile
/// is cut to resolved levels and fitted.
pub fn analyze_with_companion(
    sol: &PdeSolution,
    prob: &PdeProblem,
    companion: Option<&PdeSolution>,
    cfg: &ClassifierConfig,
) -> Result<PdeAnalysis> {
    if sol.resolution != prob.grid_points_per_axis || sol.n != prob.n || sol.field.len() != prob.node_count() {
        return Err(param("solution does not match the problem grid"));
    }
    let mut notes = Vec::new();
    let (predicted, pred_err) = match predicted_for(prob) {
        Ok(p) => (Some(p), None),
        Err(e) => (None, Some(e.to_string())),
    };
    if let Some(e) = pred_err {
        notes.push(format!("no predicted regime: {e}"));
    }
    let cell = prob.cell_volume();
    let levels = analysis_levels(&sol.field);
    let profile = distribution_function(&sol.field, cell, &levels)?;
    let max_abs = sol.field.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    if max_abs == 0.0 {
        let measured = DecayClass::Bounded { level: Some(0.0) };
        return Ok(PdeAnalysis {
            measured,
            agreement: true,
            predicted,
            exponent: None,
            stability: None,
            exp_fit: None,
            weak_fit: None,
            profile,
            max_abs,
            notes,
        });
    }

    let stability = companion.map(|c| {
        let relative_change = (max_abs - c.max_abs).abs() / max_abs;
        MaxStability {
            coarse_resolution: c.resolution,
            coarse_max: c.max_abs,
            fine_max: max_abs,
            relative_change,
            stable: relative_change < STABILITY_TOL,
        }
    });
    if stability.is_none() {
        notes.push("no companion grid; boundedness cannot be certified".into());
    }

    let (measured, exp_fit, weak_fit) = if stability.is_some_and(|s| s.stable) {
        (DecayClass::Bounded { level: Some(max_abs) }, None, None)
    } else {
        let keep: Vec<usize> = (0..profile.levels.len())
            .filter(|&j| profile.levels[j] > 0.0 && profile.measures[j] >= cfg.min_cells * cell)
            .collect();
        let resolved = DistributionProfile {
            levels: keep.iter().map(|&j| profile.levels[j]).collect(),
            measures: keep.iter().map(|&j| profile.measures[j]).collect(),
            total_measure: profile.total_measure,
            cell_volume: cell,
        };
        let c = classify_decay(&resolved, &GrowthFunction::loglinear(), cfg)?;
        (c.class, c.exp_fit, c.weak_fit)
    };

    let agreement = match &predicted {
        Some(p) => p.tag() == measured.tag(),
        None => false,
    };
    let exponent = match (&predicted, &measured) {
        (
            Some(DecayClass::WeakLebesgue { exponent: bound, open, .. }),
            DecayClass::WeakLebesgue { exponent: measured, .. },
        ) => Some(compare(*measured, *bound, *open)),
        (Some(DecayClass::ExpIntegrable { rho: bound, open, .. }), DecayClass::ExpIntegrable { rho: measured, .. }) => {
            Some(compare(*measured, *bound, *open))
        }
        _ => None,
    };
    Ok(PdeAnalysis { measured, predicted, agreement, exponent, stability, exp_fit, weak_fit, profile, max_abs, notes })
}

fn compare(measured: f64, bound: f64, open: bool) -> ExponentComparison {
    let relative_gap = (measured - bound).abs() / bound;
    ExponentComparison {
        measured,
        bound,
        open,
        below_bound: if open { measured < bound } else { measured <= bound },
        relative_gap,
        within_band: relative_gap <= EXPONENT_BAND,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_source_is_bounded_at_zero() {
        let p = PdeProblem::new(3, 9, 0.25, SourceSpec::Zero);
        let s = solve_picard(&p, 1e-8, 1e-10, 10).unwrap();
        let a = analyze_solution(&s, &p).unwrap();
        assert_eq!(a.measured, DecayClass::Bounded { level: Some(0.0) });
        assert!(a.agreement);
    }

    #[test]
    fn companion_grids() {
        assert_eq!(coarse_resolution(33), Some(17));
        assert_eq!(coarse_resolution(17), Some(9));
        assert_eq!(coarse_resolution(9), None);
    }
}
