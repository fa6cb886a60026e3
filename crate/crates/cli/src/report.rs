//! Inequality and conservation verdicts for one run, as a JSON document.

use serde::Serialize;

use nsk_core::diagnostics::{
    bd_bound, bd_identity_defect, bd_inequality, energy_inequality, norm_table, test_battery,
    weak_residual_continuity, weak_residual_momentum, BdBoundReport, InequalityReport, NormRow, BD_TOLERANCE_C,
    ENERGY_TOLERANCE_C,
};
use nsk_core::solver::config::RunConfig;
use nsk_core::solver::{default_floor, RunOutput, State};
use nsk_core::Result;

/// Total inequality violation allowed, relative to the initial functional.
pub const BUDGET_REL: f64 = 1e-6;
pub const MASS_DRIFT_PER_TIME: f64 = 1e-12;
pub const MOMENTUM_DRIFT: f64 = 1e-10;
const WEAK_TESTS: usize = 10;

#[derive(Debug, Serialize)]
pub struct Conservation {
    pub mass_drift_per_time: f64,
    pub mass_tolerance: f64,
    /// Only checked for `epsilon = 0`.
    pub momentum_drift: Option<f64>,
    pub momentum_tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct WeakResiduals {
    pub seed: u64,
    pub tests: usize,
    /// Sums over the test battery.
    pub continuity: f64,
    pub momentum: f64,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub version: String,
    pub config: RunConfig,
    pub dt: f64,
    pub steps: usize,
    pub clamp_events: usize,
    pub max_clamp: f64,
    pub cfl_warning: Option<String>,
    pub energy: InequalityReport,
    /// Absent when the density reaches the floor and the BD entropy is
    /// undefined.
    pub bd: Option<InequalityReport>,
    pub bd_bound: Option<BdBoundReport>,
    pub bd_identity_defect: Option<f64>,
    pub conservation: Conservation,
    pub norms: Vec<NormRow>,
    pub weak_residuals: WeakResiduals,
    pub pass: bool,
}

fn conservation(s0: &State, out: &RunOutput) -> Conservation {
    let s1 = out.final_state();
    let span = (s1.time - s0.time).max(f64::MIN_POSITIVE);
    let m0 = s0.mass();
    let mass_drift_per_time = if m0 > 0.0 {
        (s1.mass() - m0).abs() / m0 / span
    } else {
        (s1.mass() - m0).abs() / span
    };
    let momentum_drift = (s0.params.epsilon == 0.0).then(|| {
        s0.momentum()
            .iter()
            .zip(s1.momentum())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    });
    let pass = mass_drift_per_time <= MASS_DRIFT_PER_TIME && momentum_drift.is_none_or(|m| m <= MOMENTUM_DRIFT);
    Conservation {
        mass_drift_per_time,
        mass_tolerance: MASS_DRIFT_PER_TIME,
        momentum_drift,
        momentum_tolerance: MOMENTUM_DRIFT,
        pass,
    }
}

fn weak_residuals(cfg: &RunConfig, out: &RunOutput) -> Result<WeakResiduals> {
    let grid = out.final_state().grid().clone();
    let battery = test_battery(grid.dim(), WEAK_TESTS, cfg.seed);
    let (mut continuity, mut momentum) = (0.0, 0.0);
    for t in &battery {
        let psi = t.field(&grid);
        continuity += weak_residual_continuity(&out.frames, &psi)?;
        for l in 0..grid.dim() {
            momentum += weak_residual_momentum(&out.frames, &psi, l, cfg.floor)?;
        }
    }
    Ok(WeakResiduals {
        seed: cfg.seed,
        tests: battery.len(),
        continuity,
        momentum,
    })
}

pub fn build(version: String, cfg: &RunConfig, s0: &State, out: &RunOutput) -> Result<RunReport> {
    let energy = energy_inequality(&out.log, out.dt, ENERGY_TOLERANCE_C, BUDGET_REL)?;
    let has_bd = out.log.iter().all(|l| l.functionals.bd.is_some());
    let (bd, bound, defect) = if has_bd {
        (
            Some(bd_inequality(&out.log, out.dt, BD_TOLERANCE_C, BUDGET_REL)?),
            Some(bd_bound(&out.log, out.dt)?),
            Some(bd_identity_defect(&out.log, out.dt)?),
        )
    } else {
        (None, None, None)
    };
    let conservation = conservation(s0, out);
    let floor = cfg.floor.unwrap_or_else(|| default_floor(&s0.rho));
    let norms = norm_table(&out.frames, floor);
    let weak_residuals = weak_residuals(cfg, out)?;
    let pass = energy.pass
        && bd.as_ref().is_none_or(|r| r.pass)
        && bound.as_ref().is_none_or(|r| r.pass)
        && conservation.pass;
    Ok(RunReport {
        version,
        config: cfg.clone(),
        dt: out.dt,
        steps: out.steps,
        clamp_events: out.clamp_events,
        max_clamp: out.max_clamp,
        cfl_warning: out.cfl_warning.clone(),
        energy,
        bd,
        bd_bound: bound,
        bd_identity_defect: defect,
        conservation,
        norms,
        weak_residuals,
        pass,
    })
}
