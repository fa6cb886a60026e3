use serde::Serialize;

use super::norms::instant_norms;
use crate::error::{NskError, Result};
use crate::fields::{ScalarField, TensorField, VectorField};
use crate::operators::{korteweg_divergence, require_floor, PowerLaw};
use crate::solver::{default_floor, velocity_from, State};

/// Constant in front of the second-order density terms of the BD bound,
/// frozen once.
pub const BD_FROZEN_C: f64 = 64.0;

fn floor_or_default(state: &State, floor: Option<f64>) -> f64 {
    floor.unwrap_or_else(|| default_floor(&state.rho))
}

/// `sqrt(rho)` where `rho > floor`, 0 elsewhere.
fn masked_sqrt(rho: &ScalarField, floor: f64) -> ScalarField {
    rho.map(|r| if r > floor && r > 0.0 { r.sqrt() } else { 0.0 })
}

fn is_unit(law: &PowerLaw) -> bool {
    law.c == 1.0 && law.a == 0.0
}

/// `int rho|u|^2/2 + rho^gamma/(gamma-1) + k(rho)|grad rho|^2/2 + eps|grad sqrt(rho)|^2`.
pub fn energy(state: &State) -> Result<f64> {
    let p = &state.params;
    let rho = &state.rho;
    let u = state.velocity();
    let kinetic = (rho * &u.norm_sq()).integrate() * 0.5;
    let internal = rho.map(|r| r.powf(p.gamma)).integrate() / (p.gamma - 1.0);
    let k = p.coefficients.k.apply("k", rho)?;
    let capillary = (&k * &rho.grad().norm_sq()).integrate() * 0.5;
    let quantum = if p.epsilon > 0.0 {
        p.epsilon * rho.map(f64::sqrt).grad().norm_sq().integrate()
    } else {
        0.0
    };
    Ok(kinetic + internal + capillary + quantum)
}

/// Effective velocity `w = u + grad log rho`; needs `rho >= floor > 0`.
pub fn effective_velocity(state: &State, floor: Option<f64>) -> Result<VectorField> {
    let floor = floor_or_default(state, floor);
    positive_floor(&state.rho, floor)?;
    let u = velocity_from(state, Some(floor));
    Ok(u.add(&state.rho.map(f64::ln).grad()))
}

fn positive_floor(rho: &ScalarField, floor: f64) -> Result<()> {
    if !(floor > 0.0) {
        return Err(NskError::InvalidParameter("the BD functional needs a positive floor".into()));
    }
    require_floor(rho, floor)
}

/// `int rho|w|^2/2 + rho^gamma/(gamma-1) + k|grad rho|^2/2 + (rho - eps log rho) + eps|grad sqrt(rho)|^2`.
pub fn bd_entropy(state: &State, floor: Option<f64>) -> Result<f64> {
    let p = &state.params;
    let rho = &state.rho;
    let w = effective_velocity(state, floor)?;
    let kinetic = (rho * &w.norm_sq()).integrate() * 0.5;
    let internal = rho.map(|r| r.powf(p.gamma)).integrate() / (p.gamma - 1.0);
    let k = p.coefficients.k.apply("k", rho)?;
    let capillary = (&k * &rho.grad().norm_sq()).integrate() * 0.5;
    let eps = p.epsilon;
    let log_part = rho.map(|r| r - eps * r.ln()).integrate();
    let quantum = if eps > 0.0 {
        eps * rho.map(f64::sqrt).grad().norm_sq().integrate()
    } else {
        0.0
    };
    Ok(kinetic + internal + capillary + log_part + quantum)
}

/// `T = sqrt(rho) grad u`, `T_ij = sqrt(rho) d_j u_i`, on `{rho > floor}`.
pub fn tensor_t(state: &State, floor: Option<f64>) -> TensorField {
    let floor = floor_or_default(state, floor);
    let u = velocity_from(state, Some(floor));
    u.gradient().times(&masked_sqrt(&state.rho, floor))
}

/// Largest residual, relative to the integrals of absolute values, of
/// `int sqrt(rho) T_ij phi = -int rho u_i d_j phi - 2 int sqrt(rho) u_i d_j sqrt(rho) phi`
/// over the given scalar test functions and all index pairs.
pub fn tensor_t_identity_residual(state: &State, floor: Option<f64>, tests: &[ScalarField]) -> f64 {
    let floor = floor_or_default(state, floor);
    let t = tensor_t(state, Some(floor));
    let s = masked_sqrt(&state.rho, floor);
    let gs = s.grad();
    let u = velocity_from(state, Some(floor));
    let d = state.grid().dim();
    let mut worst = 0.0f64;
    for phi in tests {
        let gphi = phi.grad();
        for i in 0..d {
            let ui = u.component(i);
            for j in 0..d {
                let lf = &(&s * t.get(i, j)) * phi;
                let af = &(&state.rho * ui) * gphi.component(j);
                let bf = &(&(&s * ui) * gs.component(j)) * phi;
                let (lhs, a, b) = (lf.integrate(), af.integrate(), bf.integrate());
                let rhs = -a - 2.0 * b;
                // integrals of absolute values, so cancellation does not shrink the scale
                let scale = (lf.lp_norm(1.0) + af.lp_norm(1.0) + 2.0 * bf.lp_norm(1.0)).max(f64::MIN_POSITIVE);
                worst = worst.max((lhs - rhs).abs() / scale);
            }
        }
    }
    worst
}

/// The nonnegative dissipation integrals at one time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Dissipation {
    /// `int h|Du|^2 + g (div u)^2`, which is `int |T^s|^2` for `h = rho`, `g = 0`.
    pub viscous: f64,
    /// `int |T^s|^2`.
    pub ts_sq: f64,
    /// `int |T^a|^2`.
    pub ta_sq: f64,
    /// `eps int rho |u|^4`.
    pub eps_rho_u4: f64,
    /// `eps int |u|^2`.
    pub eps_u2: f64,
    /// `int |Lap rho|^2`.
    pub lap_rho_sq: f64,
    /// `int |grad rho^{gamma/2}|^2`.
    pub grad_p_half_sq: f64,
    /// `int |Hess sqrt(rho)|^2`.
    pub hess_sqrt_rho_sq: f64,
    /// `int |grad rho^{1/4}|^4`.
    pub grad_rho_quarter_4: f64,
}

impl Dissipation {
    pub fn energy_rate(&self) -> f64 {
        self.viscous + self.eps_rho_u4 + self.eps_u2
    }
}

pub fn dissipation(state: &State, floor: Option<f64>) -> Result<Dissipation> {
    let floor = floor_or_default(state, floor);
    let p = &state.params;
    let c = &p.coefficients;
    let rho = &state.rho;
    let u = velocity_from(state, Some(floor));
    let du = u.sym_grad();
    let h = c.h.apply("h", rho)?;
    let mut viscous = (&h * &du.frobenius_sq()).integrate();
    if !c.g.is_zero() {
        let g = c.g.apply("g", rho)?;
        viscous += (&g * &u.div().map(|v| v * v)).integrate();
    }
    let t = tensor_t(state, Some(floor));
    let eps = p.epsilon;
    let u2 = u.norm_sq();
    let (eps_rho_u4, eps_u2) = if eps > 0.0 {
        (
            eps * (rho * &u2.map(|v| v * v)).integrate(),
            eps * u2.integrate(),
        )
    } else {
        (0.0, 0.0)
    };
    let sqrt_rho = rho.map(f64::sqrt);
    Ok(Dissipation {
        viscous,
        ts_sq: t.symmetric_part().frobenius_sq().integrate(),
        ta_sq: t.antisymmetric_part().frobenius_sq().integrate(),
        eps_rho_u4,
        eps_u2,
        lap_rho_sq: rho.laplacian().map(|v| v * v).integrate(),
        grad_p_half_sq: rho.map(|r| r.powf(p.gamma / 2.0)).grad().norm_sq().integrate(),
        hess_sqrt_rho_sq: sqrt_rho.hessian().frobenius_sq().integrate(),
        grad_rho_quarter_4: rho
            .map(|r| r.powf(0.25))
            .grad()
            .norm_sq()
            .map(|v| v * v)
            .integrate(),
    })
}

/// Energy and BD quantities entering the discrete inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Functionals {
    pub energy: f64,
    /// Energy dissipation rate `D`.
    pub dissipation: f64,
    /// BD entropy, absent when the density touches the floor.
    pub bd: Option<f64>,
    /// Dissipation in the exact BD balance `dB/dt = -D_BD - F`.
    pub bd_dissipation: Option<f64>,
    /// Unsigned flux `F = eps int |u|^2 u . grad rho`.
    pub bd_flux: Option<f64>,
    /// Dissipation as listed in the BD bound, with [`BD_FROZEN_C`].
    pub bd_bound_dissipation: Option<f64>,
}

/// The BD balance terms for `h = rho`, `g = 0`:
/// `D_BD = int |T^a|^2 + (4/gamma) int |grad rho^{gamma/2}|^2 + K_BD
/// + (eps/2) int rho |Hess log rho|^2 + eps int rho|u|^4 + eps int |u|^2`,
/// where `K_BD = -int div K . grad log rho` (`int |Lap rho|^2` for `k = 1`).
fn bd_terms(state: &State, floor: f64, d: &Dissipation) -> Result<(f64, f64, f64)> {
    let p = &state.params;
    let rho = &state.rho;
    let eps = p.epsilon;
    let log_rho = rho.map(f64::ln);
    let glog = log_rho.grad();
    let korteweg = if is_unit(&p.coefficients.k) {
        d.lap_rho_sq
    } else {
        -korteweg_divergence(rho, &p.coefficients)?.dot(&glog).integrate()
    };
    let bohm = if eps > 0.0 {
        0.5 * eps * (rho * &log_rho.hessian().frobenius_sq()).integrate()
    } else {
        0.0
    };
    let pressure = 4.0 / p.gamma * d.grad_p_half_sq;
    let exact = d.ta_sq + pressure + korteweg + bohm + d.eps_rho_u4 + d.eps_u2;
    let u = velocity_from(state, Some(floor));
    let flux = if eps > 0.0 {
        eps * (&u.norm_sq() * &u.dot(&rho.grad())).integrate()
    } else {
        0.0
    };
    let bound = pressure
        + 0.5 * d.ta_sq
        + d.lap_rho_sq
        + eps / BD_FROZEN_C * (d.hess_sqrt_rho_sq + d.grad_rho_quarter_4)
        + d.eps_rho_u4
        + d.eps_u2;
    Ok((exact, flux, bound))
}

pub fn functionals(state: &State, floor: f64) -> Result<Functionals> {
    let d = dissipation(state, Some(floor))?;
    let energy = energy(state)?;
    let positive = floor > 0.0 && state.rho.min() >= floor;
    let (bd, bd_dissipation, bd_flux, bd_bound_dissipation) = if positive {
        let (exact, flux, bound) = bd_terms(state, floor, &d)?;
        (Some(bd_entropy(state, Some(floor))?), Some(exact), Some(flux), Some(bound))
    } else {
        (None, None, None, None)
    };
    Ok(Functionals {
        energy,
        dissipation: d.energy_rate(),
        bd,
        bd_dissipation,
        bd_flux,
        bd_bound_dissipation,
    })
}

/// One row of run diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub energy: f64,
    pub bd_entropy: Option<f64>,
    pub mass: f64,
    pub dissipation: Dissipation,
    /// Spatial norms at this time, ordered as [`super::NORMS`].
    pub norms: Vec<f64>,
    pub clamp_events: usize,
    pub max_clamp: f64,
}

impl DiagnosticsRecord {
    pub fn new(state: &State, floor: f64, clamp_events: usize, max_clamp: f64) -> Result<Self> {
        let f = functionals(state, floor)?;
        Ok(Self {
            time: state.time,
            energy: f.energy,
            bd_entropy: f.bd,
            mass: state.mass(),
            dissipation: dissipation(state, Some(floor))?,
            norms: instant_norms(state, floor),
            clamp_events,
            max_clamp,
        })
    }

    pub fn csv_header() -> String {
        let mut cols: Vec<String> = [
            "time",
            "energy",
            "bd_entropy",
            "mass",
            "viscous",
            "ts_sq",
            "eps_rho_u4",
            "eps_u2",
            "lap_rho_sq",
            "grad_p_half_sq",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        cols.extend(super::NORMS.iter().map(|n| n.name.to_string()));
        cols.push("clamp_events".into());
        cols.push("max_clamp".into());
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let d = &self.dissipation;
        let mut cols = vec![
            format!("{:.17e}", self.time),
            format!("{:.17e}", self.energy),
            self.bd_entropy.map(|b| format!("{b:.17e}")).unwrap_or_default(),
            format!("{:.17e}", self.mass),
            format!("{:.17e}", d.viscous),
            format!("{:.17e}", d.ts_sq),
            format!("{:.17e}", d.eps_rho_u4),
            format!("{:.17e}", d.eps_u2),
            format!("{:.17e}", d.lap_rho_sq),
            format!("{:.17e}", d.grad_p_half_sq),
        ];
        cols.extend(self.norms.iter().map(|v| format!("{v:.17e}")));
        cols.push(self.clamp_events.to_string());
        cols.push(format!("{:.17e}", self.max_clamp));
        cols.join(",")
    }
}
