use crate::error::{applicability, param, Result};
use crate::levelset::{distribution_function, weak_quasi_norm};
use crate::numeric::log_space;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI};

/// Right-hand side of the Dirichlet problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    Zero,
    Constant {
        value: f64,
    },
    /// `|x - center|^(-n/m_target)`, capped. `center` defaults to the cube
    /// center, `cap` to the value at half a grid spacing.
    RadialSingular {
        m_target: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default)]
        cap: Option<f64>,
    },
}

/// How face coefficients are formed from the two adjacent node values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceAveraging {
    /// Coefficient of the mean of the two node values.
    #[default]
    Arithmetic,
    /// Harmonic mean of the two node coefficients.
    Harmonic,
}

/// `-div(a(u) grad u) = f` on the unit cube with zero boundary values,
/// discretized on `grid_points_per_axis^n` interior nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeProblem {
    pub n: usize,
    pub grid_points_per_axis: usize,
    pub a_low: f64,
    pub a_high: f64,
    pub theta_deg: f64,
    pub source: SourceSpec,
    #[serde(default)]
    pub averaging: FaceAveraging,
}

impl PdeProblem {
    pub fn new(n: usize, grid_points_per_axis: usize, theta_deg: f64, source: SourceSpec) -> Self {
        Self { n, grid_points_per_axis, a_low: 1.0, a_high: 1.0, theta_deg, source, averaging: FaceAveraging::Arithmetic }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(param(format!("dimension must be >= 3, got {}", self.n)));
        }
        let r = self.grid_points_per_axis;
        if r < 9 || r % 2 != 1 {
            return Err(param(format!("grid_points_per_axis must be odd and >= 9, got {r}")));
        }
        if !(self.a_low.is_finite() && self.a_low > 0.0 && self.a_high.is_finite() && self.a_high >= self.a_low) {
            return Err(param(format!("need 0 < a_low <= a_high, got {} and {}", self.a_low, self.a_high)));
        }
        if !(self.theta_deg.is_finite() && self.theta_deg >= 0.0) {
            return Err(param(format!("theta_deg must be >= 0, got {}", self.theta_deg)));
        }
        if !matches!(r.checked_pow(self.n as u32), Some(c) if c <= 50_000_000) {
            return Err(crate::Error::Capacity(format!("{r}^{} nodes is too many", self.n)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.grid_points_per_axis as f64 + 1.0)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    pub fn node_count(&self) -> usize {
        self.grid_points_per_axis.pow(self.n as u32)
    }

    /// Node coordinates of a flat row-major index (last axis fastest).
    pub fn coordinates(&self, mut idx: usize, out: &mut [f64]) {
        let r = self.grid_points_per_axis;
        let h = self.spacing();
        for d in (0..self.n).rev() {
            out[d] = ((idx % r) as f64 + 1.0) * h;
            idx /= r;
        }
    }

    /// Same problem at another resolution.
    pub fn with_resolution(&self, r: usize) -> Self {
        Self { grid_points_per_axis: r, ..self.clone() }
    }
}

/// `a_low / ((1+|s|)^theta ln^theta(e+|s|))`.
pub fn coefficient_a(s: f64, a_low: f64, theta_deg: f64) -> f64 {
    if theta_deg == 0.0 {
        return a_low;
    }
    let t = s.abs();
    a_low / ((1.0 + t) * (E + t).ln()).powf(theta_deg)
}

/// The critical source exponent `2n/(n+2)`.
pub fn source_exponent_floor(n: usize) -> f64 {
    2.0 * n as f64 / (n as f64 + 2.0)
}

/// Sample the source at every interior node.
pub fn build_source(prob: &PdeProblem) -> Result<Vec<f64>> {
    prob.validate()?;
    let count = prob.node_count();
    match &prob.source {
        SourceSpec::Zero => Ok(vec![0.0; count]),
        SourceSpec::Constant { value } => {
            if !value.is_finite() {
                return Err(param("constant source must be finite"));
            }
            Ok(vec![*value; count])
        }
        SourceSpec::RadialSingular { m_target, center, cap } => {
            let floor = source_exponent_floor(prob.n);
            if !(*m_target > floor) {
                return Err(applicability(format!("m_target must exceed 2n/(n+2) = {floor}, got {m_target}")));
            }
            let center = match center {
                Some(c) if c.len() == prob.n => c.clone(),
                Some(c) => return Err(param(format!("center has {} coordinates, expected {}", c.len(), prob.n))),
                None => vec![0.5; prob.n],
            };
            let expo = prob.n as f64 / m_target;
            let cap = cap.unwrap_or_else(|| (prob.spacing() / 2.0).powf(-expo));
            if !(cap > 0.0) {
                return Err(param("source cap must be > 0"));
            }
            let mut x = vec![0.0; prob.n];
            Ok((0..count)
                .map(|i| {
                    prob.coordinates(i, &mut x);
                    let r = x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    if r == 0.0 {
                        cap
                    } else {
                        r.powf(-expo).min(cap)
                    }
                })
                .collect())
        }
    }
}

/// Volume of the unit ball in `n` dimensions.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceNormReport {
    pub m: f64,
    pub quasi_norm: f64,
    /// Weak norm of the exact radial profile.
    pub reference: f64,
    pub relative_error: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// Weak-`L^m` quasi-norm of a sampled radial source over the resolved
/// range, radii from four grid spacings up to 1/2.
pub fn source_weak_norm(prob: &PdeProblem, f: &[f64]) -> Result<SourceNormReport> {
    let SourceSpec::RadialSingular { m_target, .. } = &prob.source else {
        return Err(param("weak-norm check needs a radial singular source"));
    };
    let expo = prob.n as f64 / m_target;
    let (r_lo, r_hi): (f64, f64) = (4.0 * prob.spacing(), 0.5);
    let (lambda_min, lambda_max) = (r_hi.powf(-expo), r_lo.powf(-expo));
    let levels = log_space(lambda_min, lambda_max, 48);
    let prof = distribution_function(f, prob.cell_volume(), &levels)?;
    let quasi_norm = weak_quasi_norm(&prof, *m_target, None)?;
    let reference = unit_ball_volume(prob.n);
    Ok(SourceNormReport {
        m: *m_target,
        quasi_norm,
        reference,
        relative_error: (quasi_norm - reference).abs() / reference,
        lambda_min,
        lambda_max,
    })
}
