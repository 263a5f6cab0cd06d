//! Boundary-point iteration on a real block-diagonal SDP
//!
//! ```text
//! (P) min <C, X>  s.t.  A(X) = b,  X >= 0
//! (D) max b.y     s.t.  Z = C - A*(y) >= 0
//! ```
//!
//! `X` is a list of symmetric blocks plus an optional nonnegative scalar. Each
//! block entry feeds at most one row of `A`, so `A A*` is diagonal apart from
//! a rank-one term contributed by the scalar column; it is inverted by
//! Sherman-Morrison.

use alloc::vec;
use alloc::vec::Vec;

use faer::Mat;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::psd::split_real;
use super::SolverSettings;
use crate::{Error, Result};

/// Symmetric entry `A_row[k][l] = A_row[l][k] = coef` (`k <= l`).
#[derive(Clone, Copy, Debug)]
pub(crate) struct SymEntry {
    pub k: u32,
    pub l: u32,
    pub row: u32,
    pub coef: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct RealBlock {
    pub dim: usize,
    pub entries: Vec<SymEntry>,
    /// Objective matrix as `(k, l, value)` with `k <= l`.
    pub cost: Vec<(u32, u32, f64)>,
}

#[derive(Clone, Debug)]
pub(crate) struct ScalarColumn {
    /// Coefficient of the scalar in each row.
    pub column: Vec<f64>,
    pub cost: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct RealSdp {
    pub blocks: Vec<RealBlock>,
    pub nrows: usize,
    pub b: Vec<f64>,
    pub scalar: Option<ScalarColumn>,
}

#[derive(Clone, Debug)]
pub(crate) struct Iterate {
    pub x: Vec<Mat<f64>>,
    pub x_scalar: f64,
    pub y: Vec<f64>,
}

#[derive(Clone, Debug)]
pub(crate) struct Outcome {
    pub best: Iterate,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn offdiag_weight(k: u32, l: u32) -> f64 {
    if k == l {
        1.0
    } else {
        2.0
    }
}

impl RealSdp {
    fn apply(&self, x: &[Mat<f64>], x_scalar: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (blk, xm) in self.blocks.iter().zip(x) {
            for e in &blk.entries {
                out[e.row as usize] +=
                    e.coef * offdiag_weight(e.k, e.l) * xm[(e.k as usize, e.l as usize)];
            }
        }
        if let Some(s) = &self.scalar {
            for (o, u) in out.iter_mut().zip(&s.column) {
                *o += u * x_scalar;
            }
        }
    }

    /// Writes `C - A*(y)` into `out` and returns its scalar component.
    fn cost_minus_adjoint(&self, y: &[f64], out: &mut [Mat<f64>]) -> f64 {
        for (blk, m) in self.blocks.iter().zip(out.iter_mut()) {
            m.fill(0.0);
            for &(k, l, v) in &blk.cost {
                m[(k as usize, l as usize)] += v;
                if k != l {
                    m[(l as usize, k as usize)] += v;
                }
            }
            for e in &blk.entries {
                let v = e.coef * y[e.row as usize];
                let (k, l) = (e.k as usize, e.l as usize);
                m[(k, l)] -= v;
                if k != l {
                    m[(l, k)] -= v;
                }
            }
        }
        match &self.scalar {
            Some(s) => s.cost - s.column.iter().zip(y).map(|(u, yi)| u * yi).sum::<f64>(),
            None => 0.0,
        }
    }

    fn cost_inner(&self, x: &[Mat<f64>], x_scalar: f64) -> f64 {
        let mut acc = 0.0;
        for (blk, xm) in self.blocks.iter().zip(x) {
            for &(k, l, v) in &blk.cost {
                acc += v * offdiag_weight(k, l) * xm[(k as usize, l as usize)];
            }
        }
        if let Some(s) = &self.scalar {
            acc += s.cost * x_scalar;
        }
        acc
    }

    fn cost_norm(&self) -> f64 {
        let mut acc = 0.0;
        for blk in &self.blocks {
            for &(k, l, v) in &blk.cost {
                acc += offdiag_weight(k, l) * v * v;
            }
        }
        if let Some(s) = &self.scalar {
            acc += s.cost * s.cost;
        }
        acc.sqrt()
    }

    /// Diagonal of `A A*` without the scalar column.
    fn gram_diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nrows];
        for blk in &self.blocks {
            for e in &blk.entries {
                d[e.row as usize] += offdiag_weight(e.k, e.l) * e.coef * e.coef;
            }
        }
        d
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn frob_diff(a: &[Mat<f64>], b: &[Mat<f64>]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        for j in 0..x.ncols() {
            for i in 0..x.nrows() {
                let d = x[(i, j)] - y[(i, j)];
                acc += d * d;
            }
        }
    }
    acc
}

pub(crate) fn solve(sdp: &RealSdp, settings: &SolverSettings) -> Result<Outcome> {
    let m = sdp.nrows;
    let d = sdp.gram_diagonal();
    if d.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter(
            "constraint row without Gram entries",
        ));
    }
    // (D + u u^T)^{-1} via Sherman-Morrison
    let (dinv_u, sm_denominator) = match &sdp.scalar {
        Some(s) => {
            let dinv_u: Vec<f64> = s.column.iter().zip(&d).map(|(u, di)| u / di).collect();
            let denom = 1.0
                + s.column
                    .iter()
                    .zip(&dinv_u)
                    .map(|(u, v)| u * v)
                    .sum::<f64>();
            (dinv_u, denom)
        }
        None => (Vec::new(), 1.0),
    };
    let solve_normal = |rhs: &mut [f64]| {
        for (r, di) in rhs.iter_mut().zip(&d) {
            *r /= di;
        }
        if let Some(s) = &sdp.scalar {
            let t = s
                .column
                .iter()
                .zip(rhs.iter())
                .map(|(u, r)| u * r)
                .sum::<f64>()
                / sm_denominator;
            for (r, w) in rhs.iter_mut().zip(&dinv_u) {
                *r -= w * t;
            }
        }
    };

    let dims: Vec<usize> = sdp.blocks.iter().map(|b| b.dim).collect();
    let zeros = || -> Vec<Mat<f64>> { dims.iter().map(|&n| Mat::<f64>::zeros(n, n)).collect() };
    let mut x = zeros();
    let mut z = zeros();
    let mut w = zeros();
    let mut x_prev = zeros();
    let mut x_scalar = 0.0f64;
    let mut z_scalar = 0.0f64;
    let mut y = vec![0.0; m];
    let mut ax = vec![0.0; m];
    let mut az = vec![0.0; m];
    let mut ac = vec![0.0; m];

    let mut cost_mats = zeros();
    let c_scalar = sdp.cost_minus_adjoint(&vec![0.0; m], &mut cost_mats);
    sdp.apply(&cost_mats, c_scalar, &mut ac);
    let b_norm = norm(&sdp.b);
    let c_norm = sdp.cost_norm();

    let mut sigma = settings.sigma;
    let mut best: Option<(f64, Outcome)> = None;
    let mut last_balance = 0usize;

    for iter in 1..=settings.max_iter {
        sdp.apply(&z, z_scalar, &mut az);
        for i in 0..m {
            y[i] = ac[i] - az[i] + (sdp.b[i] - ax[i]) / sigma;
        }
        solve_normal(&mut y);

        let w_scalar = sdp.cost_minus_adjoint(&y, &mut w) - x_scalar / sigma;
        for (wm, xm) in w.iter_mut().zip(&x) {
            for j in 0..wm.ncols() {
                for i in 0..wm.nrows() {
                    wm[(i, j)] -= xm[(i, j)] / sigma;
                }
            }
        }
        core::mem::swap(&mut x, &mut x_prev);
        for ((wm, zm), xm) in w.iter().zip(z.iter_mut()).zip(x.iter_mut()) {
            split_real(wm, zm, xm)?;
            for j in 0..xm.ncols() {
                for i in 0..xm.nrows() {
                    xm[(i, j)] *= sigma;
                }
            }
        }
        let x_scalar_prev = x_scalar;
        z_scalar = w_scalar.max(0.0);
        x_scalar = sigma * (-w_scalar).max(0.0);

        sdp.apply(&x, x_scalar, &mut ax);
        let primal_residual = {
            let r: f64 = ax.iter().zip(&sdp.b).map(|(a, b)| (a - b) * (a - b)).sum();
            r.sqrt() / (1.0 + b_norm)
        };
        let dual_residual = {
            let ds = x_scalar - x_scalar_prev;
            (frob_diff(&x, &x_prev) + ds * ds).sqrt() / sigma / (1.0 + c_norm)
        };
        let primal_objective = sdp.cost_inner(&x, x_scalar);
        let dual_objective: f64 = sdp.b.iter().zip(&y).map(|(b, yi)| b * yi).sum();
        let gap = (primal_objective - dual_objective).abs() / (1.0 + primal_objective.abs());

        if !primal_objective.is_finite()
            || !dual_objective.is_finite()
            || y.iter()
                .any(|v| !v.is_finite() || v.abs() > settings.divergence_limit)
        {
            return Err(Error::Infeasible);
        }

        let merit = (primal_residual / settings.tol_primal)
            .max(dual_residual / settings.tol_dual)
            .max(gap / settings.tol_gap);
        let converged = merit < 1.0;
        if converged || best.as_ref().is_none_or(|(m0, _)| merit < *m0) || iter == settings.max_iter
        {
            let outcome = Outcome {
                best: Iterate {
                    x: x.clone(),
                    x_scalar,
                    y: y.clone(),
                },
                dual_objective,
                primal_residual,
                dual_residual,
                gap,
                iterations: iter,
                converged,
            };
            if converged {
                return Ok(outcome);
            }
            if best.as_ref().is_none_or(|(m0, _)| merit < *m0) {
                best = Some((merit, outcome));
            }
        }

        if iter - last_balance >= settings.balance_interval {
            let ratio = primal_residual / dual_residual.max(f64::MIN_POSITIVE);
            if ratio > settings.balance_ratio {
                sigma /= settings.balance_factor;
                last_balance = iter;
            } else if ratio < 1.0 / settings.balance_ratio {
                sigma *= settings.balance_factor;
                last_balance = iter;
            }
        }
    }
    let (_, mut outcome) = best.ok_or(Error::InvalidParameter("max_iter must be positive"))?;
    outcome.iterations = settings.max_iter;
    Ok(outcome)
}
