//! Brute-force extremal envelope: the pointwise largest non-increasing
//! grid function that satisfies every grid-pair recursion inequality.

use crate::error::{param, Error, Result};
use crate::growth::GrowthFunction;
use crate::lemma::{ln_eval_bound, DecayBound, LemmaParams, Variant};
use crate::numeric::log_space;
use serde::{Deserialize, Serialize};

/// Hard cap on grid size; the dynamic program is quadratic.
pub const MAX_LEVELS: usize = 20_000;
/// Denominator floor for relative residuals.
pub const RESIDUAL_FLOOR: f64 = 1e-300;
/// Default relative tolerance for certifying a vanishing level.
pub const VANISH_TOL: f64 = 1e-10;
/// Number of terms of the vanishing-branch proof sequence placed in a grid.
pub const VANISH_SEQUENCE_TERMS: usize = 60;
const MAX_SEQUENCE_TERMS: usize = 5000;

/// Origin of a grid level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelTag {
    Geometric,
    /// Level from the vanishing-branch proof sequence.
    ProofSequenceI,
    /// Level from the stretched-exponential proof sequence.
    ProofSequenceIi,
    /// Dyadic level `k0 2^s` used for power envelopes.
    Dyadic,
    /// Supplied by the caller or inserted by refinement.
    Explicit,
}

impl LevelTag {
    fn priority(self) -> u8 {
        match self {
            LevelTag::ProofSequenceI | LevelTag::ProofSequenceIi => 3,
            LevelTag::Dyadic => 2,
            LevelTag::Geometric => 1,
            LevelTag::Explicit => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelGrid {
    levels: Vec<f64>,
    provenance: Vec<LevelTag>,
}

impl LevelGrid {
    /// Strictly increasing finite levels, first one being `k0`.
    pub fn from_levels(levels: Vec<f64>) -> Result<Self> {
        let n = levels.len();
        Self::from_parts(levels, vec![LevelTag::Explicit; n])
    }

    fn from_parts(levels: Vec<f64>, provenance: Vec<LevelTag>) -> Result<Self> {
        if levels.is_empty() {
            return Err(param("level grid must not be empty"));
        }
        if levels.len() > MAX_LEVELS {
            return Err(Error::Capacity(format!("{} levels exceed the cap of {MAX_LEVELS}", levels.len())));
        }
        if levels.iter().any(|l| !l.is_finite()) {
            return Err(param("level grid contains non-finite values"));
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(param("level grid must be strictly increasing"));
        }
        Ok(Self { levels, provenance })
    }

    /// Sort, drop anything below `k0` or above `k_max`, merge duplicates
    /// keeping the most specific tag.
    fn from_tagged(mut pts: Vec<(f64, LevelTag)>, k0: f64, k_max: f64) -> Result<Self> {
        pts.retain(|&(l, _)| l.is_finite() && l >= k0 && l <= k_max);
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut levels: Vec<f64> = Vec::with_capacity(pts.len());
        let mut tags: Vec<LevelTag> = Vec::with_capacity(pts.len());
        for (l, t) in pts {
            if levels.last() == Some(&l) {
                let last = tags.last_mut().unwrap();
                if t.priority() > last.priority() {
                    *last = t;
                }
            } else {
                levels.push(l);
                tags.push(t);
            }
        }
        Self::from_parts(levels, tags)
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn provenance(&self) -> &[LevelTag] {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn k0(&self) -> f64 {
        self.levels[0]
    }

    /// Insert the midpoint of every adjacent pair (geometric when both ends
    /// are positive). Existing levels are kept bit for bit.
    pub fn refined(&self) -> Result<Self> {
        let mut levels = Vec::with_capacity(2 * self.len());
        let mut tags = Vec::with_capacity(2 * self.len());
        for i in 0..self.len() {
            levels.push(self.levels[i]);
            tags.push(self.provenance[i]);
            if i + 1 < self.len() {
                let (a, b) = (self.levels[i], self.levels[i + 1]);
                let m = if a > 0.0 { (a * b).sqrt() } else { 0.5 * (a + b) };
                if m > a && m < b {
                    levels.push(m);
                    tags.push(LevelTag::Explicit);
                }
            }
        }
        Self::from_parts(levels, tags)
    }
}

/// Proof-sequence levels carried by a bound, truncated at `k_max`.
pub fn proof_levels(p: &LemmaParams, bound: &DecayBound, k_max: f64) -> Vec<(f64, LevelTag)> {
    let mut out = Vec::new();
    match *bound {
        DecayBound::Vanishes { level } => {
            if p.variant == Variant::Classical {
                let d = level - p.k0;
                for s in 0..=VANISH_SEQUENCE_TERMS {
                    out.push((p.k0 + d * (1.0 - 0.5f64.powi(s as i32)), LevelTag::ProofSequenceI));
                }
            } else {
                for i in 0..=VANISH_SEQUENCE_TERMS {
                    out.push((level * (1.0 - 0.5f64.powi(i as i32 + 1)), LevelTag::ProofSequenceI));
                }
            }
            out.push((level, LevelTag::ProofSequenceI));
        }
        DecayBound::StretchedExp { k0, tau, power, .. } => {
            for s in 1..=MAX_SEQUENCE_TERMS {
                let k = k0 + tau * (s as f64).powf(1.0 / power);
                if k > k_max {
                    break;
                }
                out.push((k, LevelTag::ProofSequenceIi));
            }
        }
        DecayBound::PowerEnvelope { k0, .. } => {
            let mut k = k0;
            for _ in 0..MAX_SEQUENCE_TERMS {
                k *= 2.0;
                if k > k_max {
                    break;
                }
                out.push((k, LevelTag::Dyadic));
            }
        }
    }
    out
}

/// Geometric grid on `[k0, k_max]` merged with the proof levels of
/// `bound_hint`. For `k0 <= 0` (classical only) the geometric part is
/// log-spaced in the offset `k - k0`.
pub fn build_grid(p: &LemmaParams, k_max: f64, n_geometric: usize, bound_hint: Option<&DecayBound>) -> Result<LevelGrid> {
    if !(k_max.is_finite() && k_max > p.k0) {
        return Err(Error::Range(format!("k_max = {k_max} must exceed k0 = {}", p.k0)));
    }
    if n_geometric < 16 {
        return Err(param(format!("n_geometric must be >= 16, got {n_geometric}")));
    }
    let geo: Vec<f64> = if p.k0 > 0.0 {
        log_space(p.k0, k_max, n_geometric)
    } else {
        let span = k_max - p.k0;
        std::iter::once(p.k0)
            .chain(log_space(span * 1e-4, span, n_geometric - 1).into_iter().map(|d| p.k0 + d))
            .collect()
    };
    let mut pts: Vec<(f64, LevelTag)> = geo.into_iter().map(|l| (l, LevelTag::Geometric)).collect();
    if let Some(b) = bound_hint {
        pts.extend(proof_levels(p, b, k_max));
    }
    let grid = LevelGrid::from_tagged(pts, p.k0, k_max)?;
    Ok(grid)
}

/// Grid-sampled maximal admissible level function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeProfile {
    pub grid: LevelGrid,
    pub values: Vec<f64>,
}

impl EnvelopeProfile {
    pub fn levels(&self) -> &[f64] {
        self.grid.levels()
    }

    /// Value at an exact grid level.
    pub fn value_at_level(&self, k: f64) -> Option<f64> {
        self.grid.levels().iter().position(|&l| l == k).map(|i| self.values[i])
    }
}

/// `W(h, k) v^beta`, computed from the direct product when it is a normal
/// float and from logarithms otherwise. Shared by the envelope and the
/// admissibility check so both see bit-identical right-hand sides.
#[inline]
pub(crate) fn pair_rhs(p: &LemmaParams, h: f64, k: f64, vb: f64, ln_vb: f64) -> f64 {
    if ln_vb == f64::NEG_INFINITY {
        return 0.0;
    }
    let w = direct_weight(p, h, k);
    let prod = w * vb;
    if w.is_normal() && vb.is_normal() && prod.is_normal() {
        prod
    } else {
        (p.ln_weight(h, k) + ln_vb).exp()
    }
}

#[inline]
fn direct_weight(p: &LemmaParams, h: f64, k: f64) -> f64 {
    let d = h - k;
    let ta = p.theta * p.alpha;
    let num = match p.variant {
        Variant::Classical => p.c,
        Variant::PowerWeighted | Variant::FirstGeneralized => {
            if ta == 0.0 {
                p.c
            } else {
                p.c * h.powf(ta)
            }
        }
        Variant::SecondGeneralized => {
            if ta == 0.0 {
                p.c
            } else {
                p.c * p.growth.value(h).powf(ta)
            }
        }
    };
    let den = match p.variant {
        Variant::FirstGeneralized => p.growth.value(d).powf(p.alpha),
        _ => d.powf(p.alpha),
    };
    num / den
}

fn powers(p: &LemmaParams, v: f64) -> (f64, f64) {
    if v == 0.0 {
        (0.0, f64::NEG_INFINITY)
    } else if p.beta == 1.0 {
        (v, v.ln())
    } else {
        (v.powf(p.beta), p.beta * v.ln())
    }
}

/// Exact pointwise maximum over non-increasing grid functions with
/// `values[0] = phi0` that satisfy every grid-pair inequality.
pub fn extremal_envelope(p: &LemmaParams, grid: &LevelGrid) -> Result<EnvelopeProfile> {
    p.validate()?;
    if grid.k0() != p.k0 {
        return Err(param(format!("grid starts at {} but k0 = {}", grid.k0(), p.k0)));
    }
    let lv = grid.levels();
    let n = lv.len();
    let mut values = vec![0.0; n];
    values[0] = p.phi0;
    if p.phi0 == 0.0 {
        return Ok(EnvelopeProfile { grid: grid.clone(), values });
    }
    let mut vb = Vec::with_capacity(n);
    let mut ln_vb = Vec::with_capacity(n);
    let (a, b) = powers(p, p.phi0);
    vb.push(a);
    ln_vb.push(b);
    for j in 1..n {
        let h = lv[j];
        let mut best = values[j - 1];
        for i in 0..j {
            if best == 0.0 {
                break;
            }
            let cand = pair_rhs(p, h, lv[i], vb[i], ln_vb[i]);
            if cand.is_nan() {
                return Err(Error::Numeric(format!("non-finite weight at pair ({h}, {})", lv[i])));
            }
            if cand < best {
                best = cand;
            }
        }
        values[j] = best;
        let (a, b) = powers(p, best);
        vb.push(a);
        ln_vb.push(b);
    }
    Ok(EnvelopeProfile { grid: grid.clone(), values })
}

/// Which grid pairs an admissibility check visits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pairs", rename_all = "snake_case")]
pub enum PairFilter {
    All,
    /// Only pairs with `h = 2k` up to relative tolerance `rel_tol`.
    Doubling { rel_tol: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    /// Largest `(phi(h) - W phi(k)^beta) / max(W phi(k)^beta, floor)`.
    pub worst_residual: f64,
    /// `(k, h)` index pair of the worst residual.
    pub worst_pair: Option<(usize, usize)>,
    pub pairs_checked: usize,
    pub monotone: bool,
}

/// Residual of every selected grid pair against the recursion.
pub fn check_admissible(prof: &EnvelopeProfile, p: &LemmaParams, filter: PairFilter) -> AdmissibilityReport {
    let lv = prof.levels();
    let n = lv.len();
    let pw: Vec<(f64, f64)> = prof.values.iter().map(|&v| powers(p, v)).collect();
    let mut worst = f64::NEG_INFINITY;
    let mut worst_pair = None;
    let mut checked = 0usize;
    let mut visit = |i: usize, j: usize| {
        let rhs = pair_rhs(p, lv[j], lv[i], pw[i].0, pw[i].1);
        let r = (prof.values[j] - rhs) / rhs.max(RESIDUAL_FLOOR);
        checked += 1;
        if r > worst || worst_pair.is_none() {
            worst = r;
            worst_pair = Some((i, j));
        }
    };
    match filter {
        PairFilter::All => {
            for j in 1..n {
                for i in 0..j {
                    visit(i, j);
                }
            }
        }
        PairFilter::Doubling { rel_tol } => {
            for i in 0..n {
                let target = 2.0 * lv[i];
                let j = lv.partition_point(|&l| l < target * (1.0 - rel_tol));
                if j < n && j > i && (lv[j] - target).abs() <= rel_tol * target.abs() {
                    visit(i, j);
                }
            }
        }
    }
    let monotone = prof.values.windows(2).all(|w| w[1] <= w[0]);
    AdmissibilityReport {
        worst_residual: if checked == 0 { 0.0 } else { worst },
        worst_pair,
        pairs_checked: checked,
        monotone,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceRow {
    pub level: f64,
    pub envelope: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub passed: bool,
    pub slack: f64,
    pub levels_checked: usize,
    /// Largest envelope/bound ratio over checked levels.
    pub worst_ratio: f64,
    pub worst_level: Option<f64>,
    pub failures: Vec<DominanceRow>,
    pub rows: Vec<DominanceRow>,
}

/// Compare the envelope against a bound on every grid level where the
/// bound applies. Comparisons are done in log space.
pub fn check_dominance(b: &DecayBound, prof: &EnvelopeProfile, gf: &GrowthFunction, slack: f64, vanish_tol: f64) -> DominanceReport {
    let lv = prof.levels();
    let phi0 = prof.values[0];
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let mut worst_level = None;
    let mut checked = 0usize;
    let ln_slack = (1.0 + slack).ln();
    match *b {
        DecayBound::Vanishes { level } => {
            let mut first = true;
            for (&k, &v) in lv.iter().zip(&prof.values) {
                let (bound, ratio) = if k >= level { (0.0, if v == 0.0 { 0.0 } else { f64::INFINITY }) } else { (f64::INFINITY, 0.0) };
                let row = DominanceRow { level: k, envelope: v, bound, ratio };
                if k >= level && first {
                    first = false;
                    checked += 1;
                    let rel = if phi0 > 0.0 { v / phi0 } else { 0.0 };
                    worst = rel;
                    worst_level = Some(k);
                    if v > vanish_tol * phi0 {
                        failures.push(row.clone());
                    }
                }
                rows.push(row);
            }
        }
        _ => {
            let start = b.start();
            for (&k, &v) in lv.iter().zip(&prof.values) {
                if k < start {
                    continue;
                }
                let ln_b = ln_eval_bound(b, gf, k).unwrap_or(f64::NAN);
                let bound = ln_b.exp();
                let ln_r = if v == 0.0 { f64::NEG_INFINITY } else { v.ln() - ln_b };
                let ratio = ln_r.exp();
                let row = DominanceRow { level: k, envelope: v, bound, ratio };
                checked += 1;
                if ratio > worst || worst_level.is_none() {
                    worst = ratio;
                    worst_level = Some(k);
                }
                if !(ln_r <= ln_slack) {
                    failures.push(row.clone());
                }
                rows.push(row);
            }
        }
    }
    DominanceReport {
        passed: failures.is_empty() && checked > 0,
        slack,
        levels_checked: checked,
        worst_ratio: worst,
        worst_level,
        failures,
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lemma::classical_bound;

    #[test]
    fn three_level_example() {
        let p = LemmaParams::classical(1.0, 1.0, 2.0, 1.0, 1.0);
        let g = LevelGrid::from_levels(vec![1.0, 2.0, 5.0]).unwrap();
        let e = extremal_envelope(&p, &g).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 0.25]);
    }

    #[test]
    fn zero_start_is_absorbing() {
        let p = LemmaParams::classical(1.0, 1.0, 2.0, 1.0, 0.0);
        let g = build_grid(&p, 10.0, 32, None).unwrap();
        assert!(extremal_envelope(&p, &g).unwrap().values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn grid_errors_and_shape() {
        let p = LemmaParams::classical(1.0, 1.0, 2.0, 1.0, 1.0);
        assert!(matches!(build_grid(&p, 1.0, 16, None), Err(Error::Range(_))));
        let g = build_grid(&p, 100.0, 16, None).unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g.levels()[0], 1.0);
        assert_eq!(g.levels()[15], 100.0);
    }

    #[test]
    fn vanishing_grid_contains_sequence() {
        let p = LemmaParams::new(Variant::FirstGeneralized, 1.0, 1.0, 2.0, 0.0, 1.0, 1.0);
        let b = DecayBound::Vanishes { level: 5.657 };
        let g = build_grid(&p, 10.0, 16, Some(&b)).unwrap();
        for i in 0..=40 {
            let t = 5.657 * (1.0 - 0.5f64.powi(i + 1));
            assert!(g.levels().contains(&t), "missing t_{i}");
        }
    }

    #[test]
    fn capacity_is_enforced() {
        let levels: Vec<f64> = (0..=MAX_LEVELS).map(|i| 1.0 + i as f64).collect();
        assert!(matches!(LevelGrid::from_levels(levels), Err(Error::Capacity(_))));
    }

    #[test]
    fn inflated_profile_is_flagged() {
        let p = LemmaParams::classical(1.0, 1.0, 0.5, 1.0, 1.0);
        let g = build_grid(&p, 50.0, 40, None).unwrap();
        let mut e = extremal_envelope(&p, &g).unwrap();
        assert!(check_admissible(&e, &p, PairFilter::All).worst_residual <= 0.0);
        let j = 20;
        e.values[j] *= 2.0;
        let r = check_admissible(&e, &p, PairFilter::All);
        assert!(r.worst_residual > 0.0);
        let (i, jj) = r.worst_pair.unwrap();
        assert!(i == j || jj == j);
    }

    #[test]
    fn shrunken_constant_fails() {
        let p = LemmaParams::classical(1.0, 1.0, 0.5, 1.0, 1.0);
        let c = classical_bound(&p).unwrap();
        let g = build_grid(&p, 1e3, 128, Some(&c.bound)).unwrap();
        let e = extremal_envelope(&p, &g).unwrap();
        let gf = GrowthFunction::identity();
        assert!(check_dominance(&c.bound, &e, &gf, 0.05, VANISH_TOL).passed);
        // The envelope behaves like 16/k^2, so halving the constant still
        // dominates; a tenth of it does not.
        let half = DecayBound::PowerEnvelope { constant: 40.0, rate: 2.0, in_g: false, k0: 1.0 };
        assert!(check_dominance(&half, &e, &gf, 0.05, VANISH_TOL).passed);
        let tenth = DecayBound::PowerEnvelope { constant: 8.0, rate: 2.0, in_g: false, k0: 1.0 };
        let r = check_dominance(&tenth, &e, &gf, 0.05, VANISH_TOL);
        assert!(!r.passed);
        assert!(!r.failures.is_empty() && r.worst_level.is_some());
    }
}
