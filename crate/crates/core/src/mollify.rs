//! Space-time mollification and commutator estimators.
//!
//! The kernel is the tensor product of `b(z) = bar_beta(2 sqrt(1+d) z)` over
//! time and every space axis, so its support cube sits inside the unit
//! ball. Each 1D factor is sampled on its grid and normalized to discrete
//! mass one. Space convolution is a Fourier multiplier and therefore
//! commutes exactly with spectral derivatives; time convolution is a
//! discrete sum evaluated only on nodes whose stencil stays inside the
//! trajectory.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{NskError, Result};
use crate::fields::{Grid, ScalarField, Trajectory, VectorField};
use crate::truncations::BumpProfile;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MollifierKernel {
    pub r: f64,
    pub profile: BumpProfile,
}

/// Which commutator is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
pub enum CommutatorForm {
    /// `(B.grad f)_r - B.grad f_r` and `(g d_t f)_r - g d_t f_r`.
    #[default]
    Transport,
    /// `div (B f)_r - div(B f_r)` and `d_t (g f)_r - d_t(g f_r)`.
    Conservative,
}

impl MollifierKernel {
    pub fn new(r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(NskError::InvalidParameter(format!("mollifier radius must be positive (got {r})")));
        }
        Ok(Self {
            r,
            profile: BumpProfile,
        })
    }

    /// Smallest radius resolved by the given spacing and time step.
    pub fn min_radius(spacing: f64, dt: f64) -> f64 {
        2.0 * spacing.max(dt)
    }

    pub fn check_resolved(&self, spacing: f64, dt: f64) -> Result<()> {
        let min_r = Self::min_radius(spacing, dt);
        if self.r < min_r {
            Err(NskError::UnresolvedKernel { r: self.r, min_r })
        } else {
            Ok(())
        }
    }

    fn scale(dim: usize) -> f64 {
        2.0 * ((1 + dim) as f64).sqrt()
    }

    /// Normalized 1D weights at offsets `-J..=J` for sample step `step`.
    pub fn weights(&self, step: f64, dim: usize) -> Vec<f64> {
        let c = Self::scale(dim);
        // bar vanishes for |c z| >= 2
        let half = (2.0 / c) * self.r;
        let j = (half / step).floor() as usize;
        let mut w: Vec<f64> = (0..=2 * j)
            .map(|i| {
                let off = i as f64 - j as f64;
                self.profile.bar(c * off * step / self.r)
            })
            .collect();
        let s: f64 = w.iter().sum();
        for v in &mut w {
            *v /= s;
        }
        w
    }

    /// Fourier multiplier of the spatial kernel on `grid`.
    fn spatial_multiplier(&self, grid: &Grid) -> Vec<f64> {
        let n = grid.n();
        let w = self.weights(grid.spacing(), grid.dim());
        let j = (w.len() - 1) / 2;
        // DFT of the even periodic stencil is real
        let line: Vec<f64> = (0..n)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * grid.frequency(k) as f64 / n as f64;
                w.iter()
                    .enumerate()
                    .map(|(i, wi)| wi * (theta * (i as f64 - j as f64)).cos())
                    .sum()
            })
            .collect();
        (0..grid.len())
            .map(|flat| {
                let idx = grid.multi_index(flat);
                (0..grid.dim()).map(|a| line[idx[a]]).product()
            })
            .collect()
    }
}

/// Spatial convolution of a single field.
pub fn mollify_space(f: &ScalarField, kernel: &MollifierKernel) -> Result<ScalarField> {
    kernel.check_resolved(f.grid().spacing(), 0.0)?;
    let mult = kernel.spatial_multiplier(f.grid());
    Ok(apply_multiplier(f, &mult))
}

fn apply_multiplier(f: &ScalarField, mult: &[f64]) -> ScalarField {
    let mut spec = f.spectrum();
    for (c, m) in spec.iter_mut().zip(mult) {
        *c *= Complex64::new(*m, 0.0);
    }
    ScalarField::from_spectrum(f.grid(), spec, f.name().to_string())
}

/// First and last node (inclusive) whose time stencil of half-width `j`
/// plus `pad` extra nodes stays inside `0..len`.
fn interior(len: usize, j: usize, pad: usize) -> Result<(usize, usize)> {
    let lo = j + pad;
    if len < 2 * lo + 1 {
        return Err(NskError::InvalidParameter(format!(
            "trajectory of {len} frames is too short for a time stencil of half-width {lo}"
        )));
    }
    Ok((lo, len - 1 - lo))
}

fn time_half_width(traj_dt: f64, kernel: &MollifierKernel, dim: usize) -> usize {
    (kernel.weights(traj_dt, dim).len() - 1) / 2
}

/// Space-time mollification, returned on the interior nodes only.
pub fn mollify(f: &Trajectory<ScalarField>, kernel: &MollifierKernel) -> Result<Trajectory<ScalarField>> {
    let frames = f.frames();
    let first = frames
        .first()
        .ok_or_else(|| NskError::InvalidParameter("empty trajectory".into()))?;
    let grid = first.grid().clone();
    kernel.check_resolved(grid.spacing(), f.dt())?;
    let wt = kernel.weights(f.dt(), grid.dim());
    let j = (wt.len() - 1) / 2;
    let (lo, hi) = interior(f.len(), j, 0)?;
    let mult = kernel.spatial_multiplier(&grid);
    let space: Vec<ScalarField> = frames.par_iter().map(|fr| apply_multiplier(fr, &mult)).collect();
    let out: Vec<ScalarField> = (lo..=hi)
        .into_par_iter()
        .map(|k| {
            let mut acc = vec![0.0; grid.len()];
            for (i, w) in wt.iter().enumerate() {
                let src = space[k + j - i].values();
                for (a, v) in acc.iter_mut().zip(src) {
                    *a += w * v;
                }
            }
            ScalarField::new(&grid, acc, first.name().to_string()).expect("finite input")
        })
        .collect();
    Trajectory::new(f.time(lo), f.dt(), out)
}

/// Componentwise space-time mollification.
pub fn mollify_vector(
    f: &Trajectory<VectorField>,
    kernel: &MollifierKernel,
) -> Result<Trajectory<VectorField>> {
    let dim = f.frame(0).dim();
    let parts: Vec<Trajectory<ScalarField>> = (0..dim)
        .map(|a| mollify(&f.map(|v| v.component(a).clone()), kernel))
        .collect::<Result<_>>()?;
    let frames = (0..parts[0].len())
        .map(|k| VectorField::new(parts.iter().map(|p| p.frame(k).clone()).collect()))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(parts[0].t0(), parts[0].dt(), frames)
}

/// Restrict `f` to the frames that `g` (a mollified trajectory of `f`)
/// covers.
fn align<T: Clone>(f: &Trajectory<T>, g_t0: f64, count: usize) -> Vec<T> {
    let offset = ((g_t0 - f.t0()) / f.dt()).round() as usize;
    f.frames()[offset..offset + count].to_vec()
}

/// Space-time `L^p` norm of a trajectory of scalar fields.
pub fn spacetime_norm(f: &Trajectory<ScalarField>, p: f64) -> f64 {
    if p.is_infinite() {
        return f.frames().iter().map(ScalarField::max_abs).fold(0.0, f64::max);
    }
    let s: f64 = f
        .frames()
        .iter()
        .map(|fr| fr.lp_norm(p).powf(p) * f.dt())
        .sum();
    s.powf(1.0 / p)
}

/// Commutator field for the spatial divergence.
pub fn commutator_div_field(
    b: &Trajectory<VectorField>,
    f: &Trajectory<ScalarField>,
    kernel: &MollifierKernel,
    form: CommutatorForm,
) -> Result<Trajectory<ScalarField>> {
    if b.len() != f.len() {
        return Err(NskError::InvalidParameter("trajectories differ in length".into()));
    }
    let f_r = mollify(f, kernel)?;
    let b_in = align(b, f_r.t0(), f_r.len());
    let first = match form {
        CommutatorForm::Transport => {
            let prod = Trajectory::new(
                f.t0(),
                f.dt(),
                b.frames()
                    .iter()
                    .zip(f.frames())
                    .map(|(bv, fv)| bv.dot(&fv.grad()))
                    .collect(),
            )?;
            mollify(&prod, kernel)?
        }
        CommutatorForm::Conservative => {
            let bf = Trajectory::new(
                f.t0(),
                f.dt(),
                b.frames().iter().zip(f.frames()).map(|(bv, fv)| bv.times(fv)).collect(),
            )?;
            mollify_vector(&bf, kernel)?.map(VectorField::div)
        }
    };
    let frames = first
        .frames()
        .iter()
        .zip(&b_in)
        .zip(f_r.frames())
        .map(|((a, bv), fr)| match form {
            CommutatorForm::Transport => a - &bv.dot(&fr.grad()),
            CommutatorForm::Conservative => a - &bv.times(fr).div(),
        })
        .collect();
    Trajectory::new(f_r.t0(), f_r.dt(), frames)
}

/// `L^{p3}` norm of the divergence commutator.
pub fn commutator_div(
    b: &Trajectory<VectorField>,
    f: &Trajectory<ScalarField>,
    kernel: &MollifierKernel,
    p3: f64,
    form: CommutatorForm,
) -> Result<f64> {
    Ok(spacetime_norm(&commutator_div_field(b, f, kernel, form)?, p3))
}

/// Centered difference in time on nodes `1..len-1`.
fn time_derivative(f: &Trajectory<ScalarField>) -> Result<Trajectory<ScalarField>> {
    if f.len() < 3 {
        return Err(NskError::InvalidParameter("time derivative needs three frames".into()));
    }
    let inv = 0.5 / f.dt();
    let frames = (1..f.len() - 1)
        .map(|k| (f.frame(k + 1) - f.frame(k - 1)).scaled(inv))
        .collect();
    Trajectory::new(f.time(1), f.dt(), frames)
}

/// Commutator field for the time derivative.
pub fn commutator_dt_field(
    g: &Trajectory<ScalarField>,
    f: &Trajectory<ScalarField>,
    kernel: &MollifierKernel,
    form: CommutatorForm,
) -> Result<Trajectory<ScalarField>> {
    if g.len() != f.len() {
        return Err(NskError::InvalidParameter("trajectories differ in length".into()));
    }
    let grid = f.frame(0).grid();
    let j = time_half_width(f.dt(), kernel, grid.dim());
    let (lo, hi) = interior(f.len(), j, 1)?;
    let count = hi - lo + 1;
    let f_r = mollify(f, kernel)?;
    let (first, second) = match form {
        CommutatorForm::Transport => {
            let df = time_derivative(f)?;
            let gdf = Trajectory::new(
                df.t0(),
                df.dt(),
                df.frames()
                    .iter()
                    .zip(&g.frames()[1..g.len() - 1])
                    .map(|(d, gv)| gv * d)
                    .collect(),
            )?;
            let a = mollify(&gdf, kernel)?;
            let dfr = time_derivative(&f_r)?;
            let g_in = align(g, dfr.t0(), dfr.len());
            let b = Trajectory::new(
                dfr.t0(),
                dfr.dt(),
                dfr.frames().iter().zip(&g_in).map(|(d, gv)| gv * d).collect(),
            )?;
            (a, b)
        }
        CommutatorForm::Conservative => {
            let gf = Trajectory::new(
                f.t0(),
                f.dt(),
                g.frames().iter().zip(f.frames()).map(|(a, b)| a * b).collect(),
            )?;
            let a = time_derivative(&mollify(&gf, kernel)?)?;
            let g_in = align(g, f_r.t0(), f_r.len());
            let prod = Trajectory::new(
                f_r.t0(),
                f_r.dt(),
                f_r.frames().iter().zip(&g_in).map(|(fr, gv)| gv * fr).collect(),
            )?;
            (a, time_derivative(&prod)?)
        }
    };
    let a = align(&first, f.time(lo), count);
    let b = align(&second, f.time(lo), count);
    let frames = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    Trajectory::new(f.time(lo), f.dt(), frames)
}

/// `L^{p3}` norm of the time commutator.
pub fn commutator_dt(
    g: &Trajectory<ScalarField>,
    f: &Trajectory<ScalarField>,
    kernel: &MollifierKernel,
    p3: f64,
    form: CommutatorForm,
) -> Result<f64> {
    Ok(spacetime_norm(&commutator_dt_field(g, f, kernel, form)?, p3))
}

/// One row of a commutator sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub r: f64,
    pub p3: f64,
    pub div_norm: f64,
    pub dt_norm: f64,
}

/// Smooth test corpus: `B`, `f`, `g` built from low-frequency sines.
pub struct CommutatorCorpus {
    pub b: Trajectory<VectorField>,
    pub f: Trajectory<ScalarField>,
    pub g: Trajectory<ScalarField>,
}

impl CommutatorCorpus {
    /// Sample on `grid` over `[0, t_end]` with `frames` nodes.
    pub fn smooth(grid: &Grid, t_end: f64, frames: usize) -> Result<Self> {
        use std::f64::consts::PI;
        let dt = t_end / (frames - 1) as f64;
        let d = grid.dim();
        let mut b = Vec::with_capacity(frames);
        let mut f = Vec::with_capacity(frames);
        let mut g = Vec::with_capacity(frames);
        for k in 0..frames {
            let t = k as f64 * dt;
            b.push(VectorField::from_fn(grid, |x| {
                (0..d)
                    .map(|a| {
                        let xa = x[a];
                        let xb = x[(a + 1) % d];
                        (2.0 * PI * (xb + 0.3 * t)).sin() + 0.5 * (2.0 * PI * xa).cos() * (2.0 * PI * t).cos()
                    })
                    .collect()
            }));
            f.push(ScalarField::from_fn(grid, |x| {
                let s: f64 = x.iter().sum();
                (2.0 * PI * (x[0] - 0.5 * t)).sin() * (2.0 * PI * x[d - 1]).cos() + 0.3 * (4.0 * PI * s + t).sin()
            }));
            g.push(ScalarField::from_fn(grid, |x| {
                1.0 + 0.5 * (2.0 * PI * (x[0] + t)).cos() * (2.0 * PI * t).sin()
            }));
        }
        Ok(Self {
            b: Trajectory::new(0.0, dt, b)?,
            f: Trajectory::new(0.0, dt, f)?,
            g: Trajectory::new(0.0, dt, g)?,
        })
    }
}

/// Measure both commutators at `r0, r0/2, ..., r0/2^halvings`.
pub fn commutator_sweep(
    corpus: &CommutatorCorpus,
    r0: f64,
    halvings: u32,
    p3: f64,
    form: CommutatorForm,
) -> Result<Vec<SweepRow>> {
    (0..=halvings)
        .map(|h| {
            let r = r0 / 2f64.powi(h as i32);
            let kernel = MollifierKernel::new(r)?;
            Ok(SweepRow {
                r,
                p3,
                div_norm: commutator_div(&corpus.b, &corpus.f, &kernel, p3, form)?,
                dt_norm: commutator_dt(&corpus.g, &corpus.f, &kernel, p3, form)?,
            })
        })
        .collect()
}
