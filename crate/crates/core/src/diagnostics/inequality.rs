//! Discrete energy and BD inequalities along a run.
//!
//! A step `n -> n+1` violates a balance `dF/dt = -R` when
//! `F_{n+1} + dt (R_n + R_{n+1})/2 - F_n` exceeds `c dt^2`, with `c` a
//! frozen scheme constant.

use serde::Serialize;

use crate::error::{NskError, Result};
use crate::solver::StepLog;

/// Energy tolerance constant: twice the calibrated value (0.149) of the
/// `eps = 0.05` smooth shear reference run, IMEX at CFL 0.5.
pub const ENERGY_TOLERANCE_C: f64 = 0.3;

/// BD tolerance constant: twice the calibrated value (0.218) of the same run.
pub const BD_TOLERANCE_C: f64 = 0.45;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub name: &'static str,
    pub steps: usize,
    pub dt: f64,
    pub c: f64,
    pub initial: f64,
    pub last: f64,
    /// Accumulated dissipation (trapezoid in time).
    pub dissipated: f64,
    /// Largest per-step `F_{n+1} + dt avg(R) - F_n`, before the tolerance.
    pub max_defect: f64,
    /// Sum over steps of the excess above `c dt^2`.
    pub total_violation: f64,
    pub budget: f64,
    pub pass: bool,
}

fn series(log: &[StepLog], pick: impl Fn(&StepLog) -> Option<(f64, f64)>) -> Result<Vec<(f64, f64)>> {
    log.iter()
        .map(|s| pick(s).ok_or_else(|| NskError::InvalidParameter("functional missing from the step log".into())))
        .collect()
}

fn check(name: &'static str, pts: &[(f64, f64)], dt: f64, c: f64, budget_rel: f64) -> InequalityReport {
    let mut max_defect = f64::NEG_INFINITY;
    let mut total = 0.0;
    let mut dissipated = 0.0;
    for w in pts.windows(2) {
        let (f0, r0) = w[0];
        let (f1, r1) = w[1];
        let avg = 0.5 * dt * (r0 + r1);
        dissipated += avg;
        let defect = f1 + avg - f0;
        max_defect = max_defect.max(defect);
        total += (defect - c * dt * dt).max(0.0);
    }
    let initial = pts.first().map(|p| p.0).unwrap_or(0.0);
    let budget = budget_rel * initial.abs();
    InequalityReport {
        name,
        steps: pts.len().saturating_sub(1),
        dt,
        c,
        initial,
        last: pts.last().map(|p| p.0).unwrap_or(0.0),
        dissipated,
        max_defect: if max_defect.is_finite() { max_defect } else { 0.0 },
        total_violation: total,
        budget,
        pass: total <= budget,
    }
}

/// `E_{n+1} + dt avg(D) <= E_n + c dt^2`, total violation at most
/// `budget_rel E(0)`.
pub fn energy_inequality(log: &[StepLog], dt: f64, c: f64, budget_rel: f64) -> Result<InequalityReport> {
    let pts = series(log, |s| Some((s.functionals.energy, s.functionals.dissipation)))?;
    Ok(check("energy", &pts, dt, c, budget_rel))
}

/// `B_{n+1} + dt avg(D_BD + F) <= B_n + c dt^2` with the exact BD
/// dissipation and the signed flux.
pub fn bd_inequality(log: &[StepLog], dt: f64, c: f64, budget_rel: f64) -> Result<InequalityReport> {
    let pts = series(log, |s| {
        let f = &s.functionals;
        Some((f.bd?, f.bd_dissipation? + f.bd_flux?))
    })?;
    Ok(check("bd", &pts, dt, c, budget_rel))
}

/// Two-sided per-step residual of the BD balance, `|B_{n+1} - B_n + dt avg(D_BD + F)| / dt^2`, maximized.
pub fn bd_identity_defect(log: &[StepLog], dt: f64) -> Result<f64> {
    let pts = series(log, |s| {
        let f = &s.functionals;
        Some((f.bd?, f.bd_dissipation? + f.bd_flux?))
    })?;
    Ok(pts
        .windows(2)
        .map(|w| (w[1].0 - w[0].0 + 0.5 * dt * (w[0].1 + w[1].1)).abs() / (dt * dt))
        .fold(0.0, f64::max))
}

/// Calibration: `max_n (F_{n+1} + dt avg(R) - F_n) / dt^2`, floored at 0.
pub fn calibrate(report: &InequalityReport) -> f64 {
    (report.max_defect / (report.dt * report.dt)).max(0.0)
}

/// The bound form: `max_n [B_n + int_0^{t_n} D_bound] <= B(0) + E(0)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BdBoundReport {
    pub lhs_max: f64,
    pub rhs: f64,
    pub pass: bool,
}

pub fn bd_bound(log: &[StepLog], dt: f64) -> Result<BdBoundReport> {
    let pts = series(log, |s| {
        let f = &s.functionals;
        Some((f.bd?, f.bd_bound_dissipation?))
    })?;
    let e0 = log.first().map(|s| s.functionals.energy).unwrap_or(0.0);
    let b0 = pts.first().map(|p| p.0).unwrap_or(0.0);
    let mut acc = 0.0;
    let mut lhs_max = b0;
    for w in pts.windows(2) {
        acc += 0.5 * dt * (w[0].1 + w[1].1);
        lhs_max = lhs_max.max(w[1].0 + acc);
    }
    let rhs = b0 + e0;
    Ok(BdBoundReport {
        lhs_max,
        rhs,
        pass: lhs_max <= rhs,
    })
}
