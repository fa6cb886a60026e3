//! Remainders of the truncated momentum equation and their scaling.

use rayon::prelude::*;
use serde::Serialize;

use super::tensor_t;
use crate::error::{NskError, Result};
use crate::fields::{ScalarField, TensorField, VectorField};
use crate::operators::{checked_density, require_floor};
use crate::solver::{velocity_from, State};
use crate::truncations::{beta_bar, beta_hat, beta_l, BumpProfile, Jet};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RemainderReport {
    pub delta: f64,
    pub lambda: f64,
    /// `||R_i||_1`, `i = 1..6`.
    pub r: [f64; 6],
    /// `||R~_i||_1`, `i = 1..6`.
    pub r_tilde: [f64; 6],
    /// `||sum_i R_i||_1`.
    pub total: f64,
    /// `||sum_i R~_i||_1`.
    pub total_tilde: f64,
    /// `delta/sqrt(lambda) + lambda/delta + lambda + delta`.
    pub shape: f64,
    /// `C * shape` once a constant is fitted.
    pub bound: Option<f64>,
}

impl RemainderReport {
    pub fn parts_sum(&self) -> f64 {
        self.r.iter().sum()
    }

    pub fn tilde_parts_sum(&self) -> f64 {
        self.r_tilde.iter().sum()
    }
}

pub fn envelope_shape(delta: f64, lambda: f64) -> f64 {
    delta / lambda.sqrt() + lambda / delta + lambda + delta
}

/// Pointwise inputs shared by every remainder term.
struct Inputs {
    dim: usize,
    eps: f64,
    rho: Vec<f64>,
    sqrt_rho: Vec<f64>,
    grad_rho: VectorField,
    lap_rho: Vec<f64>,
    dt_rho: Vec<f64>,
    u: VectorField,
    t: TensorField,
    ts: TensorField,
    hess_sqrt: TensorField,
    grad_quarter: VectorField,
    cell: f64,
}

impl Inputs {
    fn new(state: &State, floor: f64) -> Result<Self> {
        let rho = checked_density(&state.rho)?;
        let eps = state.params.epsilon;
        if eps > 0.0 {
            if !(floor > 0.0) {
                return Err(NskError::InvalidParameter("the regularized remainders need a positive floor".into()));
            }
            require_floor(&rho, floor)?;
        }
        let sqrt_rho = rho.map(f64::sqrt);
        let t = tensor_t(state, Some(floor));
        Ok(Self {
            dim: rho.grid().dim(),
            eps,
            rho: rho.values().to_vec(),
            sqrt_rho: sqrt_rho.values().to_vec(),
            grad_rho: rho.grad(),
            lap_rho: rho.laplacian().into_values(),
            dt_rho: (-&state.m.div()).into_values(),
            u: velocity_from(state, Some(floor)),
            ts: t.symmetric_part(),
            t,
            hess_sqrt: sqrt_rho.hessian(),
            grad_quarter: rho.map(|r| r.powf(0.25)).grad(),
            cell: rho.grid().cell_volume(),
        })
    }

    fn vec_at(&self, v: &VectorField, i: usize) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (a, o) in out.iter_mut().enumerate().take(self.dim) {
            *o = v.component(a).values()[i];
        }
        out
    }

    fn ten_at(&self, t: &TensorField, i: usize) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (a, row) in out.iter_mut().enumerate().take(self.dim) {
            for (b, o) in row.iter_mut().enumerate().take(self.dim) {
                *o = t.get(a, b).values()[i];
            }
        }
        out
    }
}

/// `sum_{kjm} A_kj H_km B_mj`.
fn triple(d: usize, a: &[[f64; 3]; 3], h: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> f64 {
    let mut s = 0.0;
    for k in 0..d {
        for j in 0..d {
            for m in 0..d {
                s += a[k][j] * h[k][m] * b[m][j];
            }
        }
    }
    s
}

/// `sum_{kj} A_kj x_k y_j`.
fn bilinear(d: usize, a: &[[f64; 3]; 3], x: &[f64; 3], y: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for k in 0..d {
        for j in 0..d {
            s += a[k][j] * x[k] * y[j];
        }
    }
    s
}

fn dot(d: usize, x: &[f64; 3], y: &[f64; 3]) -> f64 {
    (0..d).map(|k| x[k] * y[k]).sum()
}

/// The twelve pointwise terms at grid index `i`.
fn terms_at(inp: &Inputs, i: usize, jet: &Jet, bb: f64, dbb: f64) -> ([f64; 6], [f64; 6]) {
    let d = inp.dim;
    let rho = inp.rho[i];
    let s = inp.sqrt_rho[i];
    let lap = inp.lap_rho[i];
    let gr = inp.vec_at(&inp.grad_rho, i);
    let u = inp.vec_at(&inp.u, i);
    let t = inp.ten_at(&inp.t, i);
    let ts = inp.ten_at(&inp.ts, i);
    let h = &jet.hess;
    let gy = &jet.grad;
    let mut ht = 0.0;
    for k in 0..d {
        for m in 0..d {
            ht += h[k][m] * t[m][k];
        }
    }
    let r = [
        rho * jet.value * dbb * inp.dt_rho[i],
        rho * jet.value * dbb * dot(d, &u, &gr),
        -dbb * s * bilinear(d, &ts, gy, &gr),
        s * lap * ht * bb,
        rho * lap * dbb * dot(d, gy, &gr),
        -triple(d, &ts, h, &t) * bb,
    ];
    let eps = inp.eps;
    if eps == 0.0 {
        return (r, [0.0; 6]);
    }
    let hs = inp.ten_at(&inp.hess_sqrt, i);
    let gq = inp.vec_at(&inp.grad_quarter, i);
    let mut qq = [[0.0; 3]; 3];
    for k in 0..d {
        for j in 0..d {
            qq[k][j] = gq[k] * gq[j];
        }
    }
    let uy = dot(d, &u, gy);
    let rt = [
        -eps * triple(d, &hs, h, &t) * bb,
        4.0 * eps * triple(d, &qq, h, &t) * bb,
        -eps * s * bilinear(d, &hs, gy, &gr) * dbb,
        4.0 * eps * s * bilinear(d, &qq, gy, &gr) * dbb,
        -eps * rho * dot(d, &u, &u) * uy * bb,
        -eps * uy * bb,
    ];
    (r, rt)
}

/// Per-term and total `L^1` norms of `R` and `R~` at one state, with the
/// truncation acting on velocity component `l`.
pub fn remainder(state: &State, delta: f64, lambda: f64, l: usize, floor: f64) -> Result<RemainderReport> {
    if !(delta > 0.0 && lambda > 0.0) {
        return Err(NskError::InvalidParameter(format!(
            "delta and lambda must be positive (got {delta}, {lambda})"
        )));
    }
    let inp = Inputs::new(state, floor)?;
    if l >= inp.dim {
        return Err(NskError::InvalidParameter(format!("component {l} out of range")));
    }
    let profile = BumpProfile;
    let n = inp.rho.len();
    let mut r = [0.0; 6];
    let mut rt = [0.0; 6];
    let mut total = 0.0;
    let mut total_tilde = 0.0;
    for i in 0..n {
        let y = inp.vec_at(&inp.u, i);
        let jet = beta_l(&y[..inp.dim], l, delta, &profile);
        let (bb, dbb) = beta_bar(inp.rho[i], lambda, &profile);
        let (a, b) = terms_at(&inp, i, &jet, bb, dbb);
        for k in 0..6 {
            r[k] += a[k].abs();
            rt[k] += b[k].abs();
        }
        total += a.iter().sum::<f64>().abs();
        total_tilde += b.iter().sum::<f64>().abs();
    }
    let c = inp.cell;
    Ok(RemainderReport {
        delta,
        lambda,
        r: r.map(|v| v * c),
        r_tilde: rt.map(|v| v * c),
        total: total * c,
        total_tilde: total_tilde * c,
        shape: envelope_shape(delta, lambda),
        bound: None,
    })
}

/// Sweep `delta = lambda^alpha` over `lambdas`, fitting the envelope
/// constant on the first (coarsest) point.
pub fn remainder_sweep(state: &State, lambdas: &[f64], alpha: f64, l: usize, floor: f64) -> Result<Vec<RemainderReport>> {
    let mut rows = lambdas
        .par_iter()
        .map(|&lam| remainder(state, lam.powf(alpha), lam, l, floor))
        .collect::<Result<Vec<_>>>()?;
    if let Some(first) = rows.first() {
        let c = first.total / first.shape;
        for row in &mut rows {
            row.bound = Some(c * row.shape);
        }
    }
    Ok(rows)
}

/// `||sqrt(rho) u (x) (grad_y beta_hat(u) T)||_1` with the test function
/// set to 1, the pointwise tensor measured in the Frobenius norm.
pub fn rbar_remainder(state: &State, delta: f64, floor: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(NskError::InvalidParameter(format!("delta must be positive (got {delta})")));
    }
    let rho = checked_density(&state.rho)?;
    let d = rho.grid().dim();
    let u = velocity_from(state, Some(floor));
    let t = tensor_t(state, Some(floor));
    let s = rho.map(f64::sqrt);
    let profile = BumpProfile;
    let mut acc = 0.0;
    for i in 0..rho.grid().len() {
        let mut y = [0.0; 3];
        for (a, v) in y.iter_mut().enumerate().take(d) {
            *v = u.component(a).values()[i];
        }
        let jet = beta_hat(&y[..d], delta, &profile);
        let mut gt = [0.0; 3];
        for (j, g) in gt.iter_mut().enumerate().take(d) {
            for (k, gk) in jet.grad.iter().enumerate().take(d) {
                *g += gk * t.get(k, j).values()[i];
            }
        }
        let mut fro = 0.0;
        for yi in y.iter().take(d) {
            for g in gt.iter().take(d) {
                let v = s.values()[i] * yi * g;
                fro += v * v;
            }
        }
        acc += fro.sqrt();
    }
    Ok(acc * rho.grid().cell_volume())
}

/// `rbar_remainder` over `deltas` with `C delta` fitted on the first point.
pub fn rbar_sweep(state: &State, deltas: &[f64], floor: f64) -> Result<Vec<(f64, f64, f64)>> {
    let vals = deltas
        .par_iter()
        .map(|&d| rbar_remainder(state, d, floor))
        .collect::<Result<Vec<_>>>()?;
    let c = match (vals.first(), deltas.first()) {
        (Some(v), Some(d)) => v / d,
        _ => 0.0,
    };
    Ok(deltas.iter().zip(vals).map(|(&d, v)| (d, v, c * d)).collect())
}

/// Smooth 1D-profile state for the scaling sweeps: `u = b sin(2 pi x_1) e_1`
/// and `rho = A (1 + (u/u0)^2)^-2`, so the density thins out where the
/// velocity is large.
pub fn stress_state(
    grid: &crate::fields::Grid,
    amplitude: f64,
    b: f64,
    u0: f64,
    params: crate::operators::PhysicsParams,
) -> Result<State> {
    use std::f64::consts::TAU;
    if !(amplitude > 0.0 && u0 > 0.0) {
        return Err(NskError::InvalidParameter(format!(
            "amplitude and u0 must be positive (got {amplitude}, {u0})"
        )));
    }
    let speed = |x: &[f64]| b * (TAU * x[0]).sin();
    let rho = ScalarField::from_fn(grid, |x| {
        let v = speed(x) / u0;
        amplitude / (1.0 + v * v).powi(2)
    });
    let u = VectorField::from_fn(grid, |x| {
        let mut v = vec![0.0; grid.dim()];
        v[0] = speed(x);
        v
    });
    State::from_velocity(rho, &u, 0.0, params)
}
