use super::cg::{conjugate_gradient, Stencil};
use super::problem::{build_source, coefficient_a, PdeProblem};
use crate::error::{param, Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

pub const DEFAULT_OMEGA: f64 = 0.7;
pub const MAX_HALVINGS: usize = 5;
const CG_MAX_ITER: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeSolution {
    pub n: usize,
    pub resolution: usize,
    /// Node values, row-major with the last axis fastest.
    pub field: Vec<f64>,
    pub picard_iterations: usize,
    pub final_update_norm: f64,
    /// Relative residual of the last frozen-coefficient linear solve.
    pub linear_residual: f64,
    /// `||A(u) u - f|| / ||f||` at the returned field.
    pub nonlinear_residual: f64,
    pub update_history: Vec<f64>,
    pub omega: f64,
    /// Smallest and largest face coefficient of the last assembly.
    pub face_coefficient_range: (f64, f64),
    pub max_abs: f64,
}

fn node_coefficients(prob: &PdeProblem, u: &[f64]) -> Vec<f64> {
    u.iter().map(|&s| coefficient_a(s, prob.a_low, prob.theta_deg)).collect()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Picard iteration: freeze `a(u)`, solve the linear problem, move
/// a fraction `omega` toward the solve, halve `omega` when the max-norm
/// update grows (at most five times).
pub fn solve_picard(prob: &PdeProblem, picard_tol: f64, linear_tol: f64, max_picard: usize) -> Result<PdeSolution> {
    if !(picard_tol > 0.0 && linear_tol > 0.0) {
        return Err(param("tolerances must be > 0"));
    }
    if max_picard == 0 {
        return Err(param("max_picard must be >= 1"));
    }
    let f = build_source(prob)?;
    let count = f.len();
    let boundary_a = coefficient_a(0.0, prob.a_low, prob.theta_deg);
    let mut u = vec![0.0; count];
    let mut w = vec![0.0; count];
    let mut omega = DEFAULT_OMEGA;
    let mut halvings = 0;
    let mut prev = f64::INFINITY;
    let mut history = Vec::new();
    for it in 1..=max_picard {
        let op = Stencil::new(prob, node_coefficients(prob, &u), boundary_a);
        w.copy_from_slice(&u);
        let cg = conjugate_gradient(&op, &f, &mut w, linear_tol, CG_MAX_ITER)?;
        let jump = u.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let mut update = omega * jump;
        if update > prev && halvings < MAX_HALVINGS {
            omega *= 0.5;
            halvings += 1;
            update = omega * jump;
        }
        for (ui, wi) in u.iter_mut().zip(&w) {
            *ui += omega * (wi - *ui);
        }
        history.push(update);
        prev = update;
        if update <= picard_tol {
            let op = Stencil::new(prob, node_coefficients(prob, &u), boundary_a);
            let mut au = vec![0.0; count];
            op.apply(&u, &mut au);
            let f_norm = norm2(&f);
            let nonlinear_residual =
                if f_norm == 0.0 { norm2(&au) } else { norm2(&au.iter().zip(&f).map(|(a, b)| a - b).collect::<Vec<_>>()) / f_norm };
            let max_abs = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            return Ok(PdeSolution {
                n: prob.n,
                resolution: prob.grid_points_per_axis,
                field: u,
                picard_iterations: it,
                final_update_norm: update,
                linear_residual: cg.rel_residual,
                nonlinear_residual,
                update_history: history,
                omega,
                face_coefficient_range: op.face_range(),
                max_abs,
            });
        }
    }
    Err(Error::Convergence { iterations: max_picard, last_update: prev, history })
}

/// Flat binary layout: `u64` dimension, `u64` resolution, then the field as
/// `f64`, all little-endian, row-major.
pub fn write_field_binary<W: Write>(sol: &PdeSolution, mut w: W) -> std::io::Result<()> {
    w.write_all(&(sol.n as u64).to_le_bytes())?;
    w.write_all(&(sol.resolution as u64).to_le_bytes())?;
    for v in &sol.field {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()
}

/// Inverse of [`write_field_binary`]: `(n, resolution, field)`.
pub fn read_field_binary<R: Read>(mut r: R) -> Result<(usize, usize, Vec<f64>)> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf).map_err(|e| Error::Domain(format!("read failed: {e}")))?;
    if buf.len() < 16 || (buf.len() - 16) % 8 != 0 {
        return Err(Error::Domain(format!("malformed field file of {} bytes", buf.len())));
    }
    let word = |i: usize| u64::from_le_bytes(buf[i..i + 8].try_into().unwrap());
    let (n, res) = (word(0) as usize, word(8) as usize);
    let field: Vec<f64> = buf[16..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    if res.checked_pow(n as u32) != Some(field.len()) {
        return Err(Error::Domain(format!("header {n}x{res} does not match {} values", field.len())));
    }
    Ok((n, res, field))
}
