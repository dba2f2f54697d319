//! Small numerical helpers: log grids, bracketed bisection, tail probes,
//! golden-section refinement and ordinary least squares.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// `n` log-spaced points from `a` to `b`, endpoints reproduced exactly.
pub fn log_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let (la, lb) = (a.ln(), b.ln());
            let step = (lb - la) / (n - 1) as f64;
            let mut v: Vec<f64> = (0..n).map(|i| (la + step * i as f64).exp()).collect();
            v[0] = a;
            v[n - 1] = b;
            v
        }
    }
}

/// Smallest `x >= lo` (to relative tolerance `rel_tol`) with `pred(x)` true,
/// assuming `pred` is monotone false-then-true. The returned point always
/// satisfies `pred`.
pub fn smallest_satisfying<F: FnMut(f64) -> bool>(mut pred: F, lo: f64, rel_tol: f64) -> Result<f64> {
    if !(lo.is_finite() && lo > 0.0) {
        return Err(Error::Numeric(format!("bracket start must be positive, got {lo}")));
    }
    if pred(lo) {
        return Ok(lo);
    }
    let mut a = lo;
    let mut b = lo * 2.0;
    let mut found = false;
    for _ in 0..2000 {
        if !b.is_finite() {
            break;
        }
        if pred(b) {
            found = true;
            break;
        }
        a = b;
        b *= 2.0;
    }
    if !found {
        return Err(Error::Numeric(format!("no satisfying point found above {lo}")));
    }
    while b - a > rel_tol * b {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if pred(m) {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(b)
}

/// True when `f` is finite and strictly decreasing at `per_decade` samples
/// per decade over `decades` decades starting at `start`.
pub fn tail_strictly_decreasing<F: Fn(f64) -> f64>(f: F, start: f64, decades: u32, per_decade: u32) -> bool {
    let n = (decades * per_decade) as usize;
    let pts = log_space(start, start * 10f64.powi(decades as i32), n + 1);
    let mut prev = f(pts[0]);
    if !prev.is_finite() {
        return false;
    }
    for &x in &pts[1..] {
        let v = f(x);
        if !(v.is_finite() && v < prev) {
            return false;
        }
        prev = v;
    }
    true
}

/// Maximize `f` on `[lo, hi]` with a log grid followed by golden-section
/// refinement around the best grid point. Returns `(argmax, max)`.
pub fn maximize_on_log_grid<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, per_decade: usize) -> (f64, f64) {
    let decades = (hi / lo).log10().max(0.0);
    let n = ((decades * per_decade as f64).ceil() as usize).max(2) + 1;
    let pts = log_space(lo, hi, n);
    let mut best = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for (i, &x) in pts.iter().enumerate() {
        let v = f(x);
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    let a = pts[best.saturating_sub(1)].ln();
    let b = pts[(best + 1).min(n - 1)].ln();
    let (x, v) = golden_max(|y| f(y.exp()), a, b, 80);
    if v > best_v {
        (x.exp(), v)
    } else {
        (pts[best], best_v)
    }
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Result of an ordinary least-squares line fit `y ~ slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual divided by the spread of `y`.
    pub max_rel_residual: f64,
    pub points: usize,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::InsufficientData(format!("line fit needs >= 2 paired points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|&v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::InsufficientData("line fit with degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let spread = hi - lo;
    let worst = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| (b - (slope * a + intercept)).abs())
        .fold(0.0, f64::max);
    let max_rel_residual = if spread > 0.0 { worst / spread } else { 0.0 };
    Ok(LinearFit { slope, intercept, max_rel_residual, points: n })
}
