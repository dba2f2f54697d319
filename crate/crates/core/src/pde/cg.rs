//! Matrix-free `2n+1`-point stencil and Jacobi-preconditioned conjugate
//! gradients.

use super::problem::{FaceAveraging, PdeProblem};
use crate::error::{Error, Result};

/// Frozen-coefficient operator `(A u)_i = sum_faces a_f (u_i - u_j) / h^2`
/// with `u_j = 0` outside the grid.
pub struct Stencil {
    n: usize,
    r: usize,
    inv_h2: f64,
    node_a: Vec<f64>,
    boundary_a: f64,
    averaging: FaceAveraging,
    strides: Vec<usize>,
}

impl Stencil {
    /// `node_a[i]` is the coefficient at node `i`; `boundary_a` the
    /// coefficient at the Dirichlet boundary (where `u = 0`).
    pub fn new(prob: &PdeProblem, node_a: Vec<f64>, boundary_a: f64) -> Self {
        let n = prob.n;
        let r = prob.grid_points_per_axis;
        let strides = (0..n).map(|d| r.pow((n - 1 - d) as u32)).collect();
        let h = prob.spacing();
        Self { n, r, inv_h2: 1.0 / (h * h), node_a, boundary_a, averaging: prob.averaging, strides }
    }

    #[inline]
    fn face(&self, a: f64, b: f64) -> f64 {
        match self.averaging {
            FaceAveraging::Arithmetic => 0.5 * (a + b),
            FaceAveraging::Harmonic => 2.0 * a * b / (a + b),
        }
    }

    pub fn len(&self) -> usize {
        self.node_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_a.is_empty()
    }

    /// Smallest and largest face coefficient in use.
    pub fn face_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        self.for_each_face(|_, _, a| {
            lo = lo.min(a);
            hi = hi.max(a);
        });
        (lo, hi)
    }

    /// Visit every face as `(i, Some(j) | None, coefficient)`; `None` marks
    /// a boundary face. Each interior face is visited once.
    fn for_each_face<F: FnMut(usize, Option<usize>, f64)>(&self, mut f: F) {
        for d in 0..self.n {
            let s = self.strides[d];
            for i in 0..self.len() {
                let c = (i / s) % self.r;
                let ai = self.node_a[i];
                if c == 0 {
                    f(i, None, self.face(ai, self.boundary_a));
                }
                if c + 1 < self.r {
                    f(i, Some(i + s), self.face(ai, self.node_a[i + s]));
                } else {
                    f(i, None, self.face(ai, self.boundary_a));
                }
            }
        }
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        let k = self.inv_h2;
        self.for_each_face(|i, j, a| match j {
            Some(j) => {
                let flux = a * k * (x[i] - x[j]);
                y[i] += flux;
                y[j] -= flux;
            }
            None => y[i] += a * k * x[i],
        });
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.len()];
        let k = self.inv_h2;
        self.for_each_face(|i, j, a| {
            d[i] += a * k;
            if let Some(j) = j {
                d[j] += a * k;
            }
        });
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// `||b - A x|| / ||b||` (0 for a zero right-hand side).
    pub rel_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned CG from the initial guess in `x`.
pub fn conjugate_gradient(op: &Stencil, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize) -> Result<CgOutcome> {
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgOutcome { iterations: 0, rel_residual: 0.0 });
    }
    let inv_d: Vec<f64> = op.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let mut z: Vec<f64> = r.iter().zip(&inv_d).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let target = rel_tol * b_norm;
    let mut res = dot(&r, &r).sqrt();
    for it in 0..max_iter {
        if res <= target {
            return Ok(CgOutcome { iterations: it, rel_residual: res / b_norm });
        }
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Numeric(format!("conjugate gradients broke down (p.Ap = {pap})")));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] * inv_d[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        res = dot(&r, &r).sqrt();
    }
    if res <= target {
        return Ok(CgOutcome { iterations: max_iter, rel_residual: res / b_norm });
    }
    Err(Error::Numeric(format!("conjugate gradients stagnated at relative residual {:e} after {max_iter} iterations", res / b_norm)))
}
