use crate::error::{param, require_nonnegative, require_positive, Result};
use crate::hp::{Hp, PREC};
use astro_float::BigFloat;
use serde::{Deserialize, Serialize};

/// Outcome of iterating `x_{i+1} = C B^i x_i^beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GiustiRun {
    /// `x_0, ..., x_{n-1}`, rounded to f64 (may underflow to 0).
    pub values: Vec<f64>,
    /// `C^(-1/(beta-1)) B^(-1/(beta-1)^2)`.
    pub threshold: f64,
    pub below_threshold: bool,
    /// Whether `x_i <= B^(-i/(beta-1)) x_0` held (relative slack 1e-9).
    pub decay_held: bool,
    /// Largest `x_i / (B^(-i/(beta-1)) x_0) - 1`.
    pub max_rel_excess: f64,
}

pub const DECAY_REL_TOL: f64 = 1e-9;

pub fn giusti_threshold(c: f64, b: f64, beta: f64) -> f64 {
    let e = 1.0 / (beta - 1.0);
    c.powf(-e) * b.powf(-e * e)
}

fn check(c: f64, b: f64, beta: f64, n: usize) -> Result<()> {
    require_positive("C", c)?;
    if !(b > 1.0 && b.is_finite()) {
        return Err(param(format!("B must be > 1, got {b}")));
    }
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(param(format!("beta must be > 1, got {beta}")));
    }
    if n == 0 {
        return Err(param("n must be >= 1"));
    }
    Ok(())
}

/// Iterate from `x0`. The recursion runs on `ln x_i` in 192-bit
/// arithmetic: near the threshold it is an unstable fixed point and f64
/// rounding grows like `beta^i`.
pub fn giusti_iterate(c: f64, b: f64, beta: f64, x0: f64, n: usize) -> Result<GiustiRun> {
    check(c, b, beta, n)?;
    require_nonnegative("x0", x0)?;
    if x0 == 0.0 {
        return Ok(GiustiRun {
            values: vec![0.0; n],
            threshold: giusti_threshold(c, b, beta),
            below_threshold: true,
            decay_held: true,
            max_rel_excess: 0.0,
        });
    }
    let mut hp = Hp::new()?;
    let ln_x0 = hp.f(x0).ln(PREC, hp.rm, &mut hp.cc);
    run(hp, c, b, beta, ln_x0, n)
}

/// Iterate from the threshold itself, computed in 192-bit arithmetic.
pub fn giusti_iterate_at_threshold(c: f64, b: f64, beta: f64, n: usize) -> Result<GiustiRun> {
    check(c, b, beta, n)?;
    let mut hp = Hp::new()?;
    let ln_x0 = ln_threshold(&mut hp, c, b, beta);
    run(hp, c, b, beta, ln_x0, n)
}

fn ln_threshold(hp: &mut Hp, c: f64, b: f64, beta: f64) -> BigFloat {
    let rm = hp.rm;
    let e = hp.f(1.0).div(&hp.f(beta - 1.0), PREC, rm);
    let lc = hp.f(c).ln(PREC, rm, &mut hp.cc);
    let lb = hp.f(b).ln(PREC, rm, &mut hp.cc);
    lc.mul(&e, PREC, rm).add(&lb.mul(&e.mul(&e, PREC, rm), PREC, rm), PREC, rm).neg()
}

fn run(mut hp: Hp, c: f64, b: f64, beta: f64, ln_x0: BigFloat, n: usize) -> Result<GiustiRun> {
    let rm = hp.rm;
    let lc = hp.f(c).ln(PREC, rm, &mut hp.cc);
    let lb = hp.f(b).ln(PREC, rm, &mut hp.cc);
    let bbeta = hp.f(beta);
    let ln_rate = lb.div(&hp.f(beta - 1.0), PREC, rm).neg();
    let below_threshold = ln_x0 <= ln_threshold(&mut hp, c, b, beta);
    let mut values = Vec::with_capacity(n);
    let mut lx = ln_x0.clone();
    let mut ln_cap = ln_x0;
    let mut ln_bi = hp.f(0.0);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..n {
        values.push(Hp::to_f64(&lx)?.exp());
        worst = worst.max(Hp::to_f64(&lx.sub(&ln_cap, PREC, rm))?.exp_m1());
        lx = lc.add(&ln_bi, PREC, rm).add(&bbeta.mul(&lx, PREC, rm), PREC, rm);
        ln_bi = ln_bi.add(&lb, PREC, rm);
        ln_cap = ln_cap.add(&ln_rate, PREC, rm);
    }
    let threshold = giusti_threshold(c, b, beta);
    Ok(GiustiRun {
        below_threshold,
        values,
        threshold,
        decay_held: worst <= DECAY_REL_TOL,
        max_rel_excess: worst,
    })
}
