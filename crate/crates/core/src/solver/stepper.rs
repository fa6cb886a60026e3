use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::linear::{LinearOperator, SpecState};
use super::rhs::{rhs, BLOWUP_MAGNITUDE};
use super::{default_floor, velocity_of, State};
use crate::diagnostics::{functionals, DiagnosticsRecord, Functionals};
use crate::error::{NskError, Result};
use crate::fields::{Grid, ScalarField, Trajectory, VectorField};

type C = Complex64;

/// Stability radius of classical RK4 used to turn a rate into a step.
const RK4_RADIUS: f64 = 2.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Scheme {
    /// Classical four-stage Runge-Kutta.
    Rk4,
    /// Integrating-factor RK4 with the linearization about the mean density
    /// treated exactly in mode space.
    Imex,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum TimeStep {
    Fixed(f64),
    /// Fraction of the stability limit, evaluated on the initial state.
    Cfl(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CflPolicy {
    Abort,
    Warn,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub step: TimeStep,
    pub cfl_policy: CflPolicy,
    /// Velocity-recovery floor; `None` uses `1e-10 max rho`.
    pub vacuum_floor: Option<f64>,
    pub t_end: f64,
    /// Keep a frame and a diagnostics record every this many steps.
    pub output_every: usize,
    /// Evaluate energy and BD functionals after every step.
    pub track_functionals: bool,
}

impl SolverConfig {
    pub fn new(scheme: Scheme, step: TimeStep, t_end: f64) -> Self {
        Self {
            scheme,
            step,
            cfl_policy: CflPolicy::Warn,
            vacuum_floor: None,
            t_end,
            output_every: 1,
            track_functionals: false,
        }
    }

    pub fn with_output_every(mut self, every: usize) -> Self {
        self.output_every = every.max(1);
        self
    }

    pub fn with_functionals(mut self) -> Self {
        self.track_functionals = true;
        self
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.vacuum_floor = Some(floor);
        self
    }

    pub fn with_policy(mut self, policy: CflPolicy) -> Self {
        self.cfl_policy = policy;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(NskError::InvalidParameter(format!("end time must be positive (got {})", self.t_end)));
        }
        match self.step {
            TimeStep::Fixed(dt) if !(dt > 0.0 && dt.is_finite()) => {
                Err(NskError::InvalidParameter(format!("dt must be positive (got {dt})")))
            }
            TimeStep::Cfl(c) if !(c > 0.0 && c <= 1.0) => {
                Err(NskError::InvalidParameter(format!("cfl factor must lie in (0, 1] (got {c})")))
            }
            _ => Ok(()),
        }
    }
}

/// Functionals after each accepted step (index 0 is the initial state).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StepLog {
    pub time: f64,
    pub functionals: Functionals,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub frames: Trajectory<State>,
    pub records: Vec<DiagnosticsRecord>,
    pub log: Vec<StepLog>,
    pub dt: f64,
    pub steps: usize,
    pub clamp_events: usize,
    /// Largest negative density removed by clamping.
    pub max_clamp: f64,
    pub cfl_warning: Option<String>,
}

impl RunOutput {
    pub fn final_state(&self) -> &State {
        self.frames.frame(self.frames.len() - 1)
    }
}

/// Largest stable step estimate for `scheme` at `state`.
///
/// The explicit rate bounds advection, sound, capillary dispersion,
/// viscous diffusion and drag at the largest retained wavenumber. For the
/// integrating-factor scheme only the part of each rate not captured by the
/// constant-coefficient linearization remains.
pub fn stability_limit(state: &State, scheme: Scheme, floor: f64) -> Result<f64> {
    let g = state.grid();
    let p = &state.params;
    let c = &p.coefficients;
    let q = 2.0 * PI * g.dealias_cutoff() as f64 * (g.dim() as f64).sqrt();
    let rho = &state.rho;
    let u = velocity_of(rho, &state.m, floor);
    let umax = u.norm().max();
    let u2max = umax * umax;
    let rho_min = rho.min().max(floor).max(f64::MIN_POSITIVE);
    let rho_bar = rho.mean();
    let eps = p.epsilon;

    let sound = |r: f64| (p.gamma * r.max(0.0).powf(p.gamma - 1.0)).sqrt();
    let cap = |r: f64| (r * c.k.eval(r.max(rho_min)) + 0.5 * eps).max(0.0).sqrt();
    let visc = |r: f64| {
        let r = r.max(rho_min);
        (c.h.eval(r) + c.g.eval(r).abs()) / r
    };
    let drag = eps * (1.0 / rho_min + 3.0 * u2max);

    let vals = rho.values();
    let rate = match scheme {
        Scheme::Rk4 => {
            let cs = vals.iter().map(|&r| sound(r)).fold(0.0, f64::max);
            let kap = vals.iter().map(|&r| cap(r)).fold(0.0, f64::max);
            let nu = vals.iter().map(|&r| visc(r)).fold(0.0, f64::max);
            (umax + cs) * q + kap * q * q + nu * q * q + drag
        }
        Scheme::Imex => {
            let (cs0, kap0, nu0) = (sound(rho_bar), cap(rho_bar), visc(rho_bar));
            let grad_log = rho.grad().norm().zip_map(rho, |gr, r| gr / r.max(rho_min)).max();
            let cs = vals.iter().map(|&r| (sound(r) - cs0).abs()).fold(0.0, f64::max);
            let kap = vals.iter().map(|&r| (cap(r) - kap0).abs()).fold(0.0, f64::max);
            let nu = vals.iter().map(|&r| visc(r)).fold(0.0, f64::max);
            let dnu = vals.iter().map(|&r| (visc(r) - nu0).abs()).fold(0.0, f64::max);
            let drag_res = (drag - eps / rho_bar).abs();
            (umax + cs) * q + kap * q * q + dnu * q * q + grad_log * nu * q + drag_res
        }
    };
    if !(rate > 0.0) {
        return Ok(f64::INFINITY);
    }
    Ok(RK4_RADIUS / rate)
}

/// Precomputed operator exponentials for one step size.
struct Propagator {
    dt: f64,
    floor: f64,
    lin: LinearOperator,
    full: LinearOperator,
    half: LinearOperator,
}

impl Propagator {
    fn new(grid: &Grid, state: &State, scheme: Scheme, dt: f64, floor: f64) -> Self {
        let lin = match scheme {
            Scheme::Rk4 => LinearOperator::zero(grid),
            Scheme::Imex => LinearOperator::new(grid, &state.params, state.rho.mean()),
        };
        let full = lin.exponential(dt);
        let half = lin.exponential(0.5 * dt);
        Self {
            dt,
            floor,
            lin,
            full,
            half,
        }
    }
}

fn filter(grid: &Grid, spec: &mut [C]) {
    for (i, c) in spec.iter_mut().enumerate() {
        if !grid.retained(i) {
            *c = C::new(0.0, 0.0);
        }
    }
}

fn to_spec(state: &State) -> SpecState {
    let g = state.grid();
    let mut rho = state.rho.spectrum();
    filter(g, &mut rho);
    let m = state
        .m
        .components()
        .iter()
        .map(|c| {
            let mut s = c.spectrum();
            filter(g, &mut s);
            s
        })
        .collect();
    SpecState { rho, m }
}

/// Physical fields of a spectral state; density is returned unclamped.
fn to_phys(grid: &Grid, s: &SpecState) -> (Vec<f64>, VectorField) {
    let rho = grid.inverse(s.rho.clone());
    let comps = s
        .m
        .iter()
        .enumerate()
        .map(|(a, c)| ScalarField::from_spectrum(grid, c.clone(), format!("m_{a}")))
        .collect();
    (rho, VectorField::new(comps).expect("components share the grid"))
}

fn blowup(stage: usize, term: &str, magnitude: f64) -> NskError {
    NskError::BlowUp {
        stage,
        term: term.into(),
        magnitude,
    }
}

fn check_values(stage: usize, term: &str, values: &[f64]) -> Result<()> {
    let mag = values.iter().fold(0.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY });
    if !mag.is_finite() || mag > BLOWUP_MAGNITUDE {
        return Err(blowup(stage, term, mag));
    }
    Ok(())
}

/// Full tendency `F(u)` projected onto the retained band.
///
/// The continuity tendency is a divergence and every momentum term except
/// the drag is a divergence or a gradient, so their mean modes are set to
/// exactly zero.
fn tendency(grid: &Grid, s: &SpecState, template: &State, floor: f64, stage: usize) -> Result<SpecState> {
    let (rho_raw, m) = to_phys(grid, s);
    check_values(stage, "density", &rho_raw)?;
    for c in m.components() {
        check_values(stage, "momentum", c.values())?;
    }
    let rho = ScalarField::from_raw(grid, rho_raw.iter().map(|r| r.max(0.0)).collect(), "rho");
    let state = State {
        rho,
        m,
        time: template.time,
        params: template.params,
    };
    let terms = rhs(&state, floor)?;
    terms.check(stage)?;
    let mut drho = terms.drho.spectrum();
    filter(grid, &mut drho);
    drho[0] = C::new(0.0, 0.0);
    let conservative = terms
        .convection
        .add(&terms.viscous)
        .add(&terms.pressure)
        .add(&terms.korteweg)
        .add(&terms.bohm);
    let dm = conservative
        .components()
        .iter()
        .zip(terms.drag.components())
        .map(|(c, d)| {
            let mut spec = c.spectrum();
            let ds = d.spectrum();
            for (x, y) in spec.iter_mut().zip(&ds) {
                *x += y;
            }
            spec[0] = ds[0];
            filter(grid, &mut spec);
            spec
        })
        .collect();
    Ok(SpecState { rho: drho, m: dm })
}

/// Nonlinear remainder `N(u) = F(u) - L u`.
fn remainder(prop: &Propagator, grid: &Grid, s: &SpecState, template: &State, stage: usize) -> Result<SpecState> {
    let f = tendency(grid, s, template, prop.floor, stage)?;
    Ok(f.axpy(-1.0, &prop.lin.apply(s)))
}

/// One integrating-factor RK4 step; with `L = 0` this is classical RK4.
fn advance(prop: &Propagator, grid: &Grid, u: &SpecState, template: &State) -> Result<SpecState> {
    let h = prop.dt;
    let (e, e2) = (&prop.full, &prop.half);
    let k1 = remainder(prop, grid, u, template, 1)?;
    let ua = e2.apply(&u.axpy(0.5 * h, &k1));
    let k2 = remainder(prop, grid, &ua, template, 2)?;
    let e2u = e2.apply(u);
    let ub = e2u.axpy(0.5 * h, &k2);
    let k3 = remainder(prop, grid, &ub, template, 3)?;
    let eu = e.apply(u);
    let uc = eu.axpy(h, &e2.apply(&k3));
    let k4 = remainder(prop, grid, &uc, template, 4)?;
    let mid = e2.apply(&k2.axpy(1.0, &k3));
    let acc = e.apply(&k1).axpy(2.0, &mid).axpy(1.0, &k4);
    Ok(eu.axpy(h / 6.0, &acc))
}

struct Clamp {
    events: usize,
    max: f64,
}

fn finish(grid: &Grid, s: &SpecState, template: &State, time: f64, clamp: &mut Clamp) -> Result<State> {
    let (rho_raw, m) = to_phys(grid, s);
    check_values(4, "density", &rho_raw)?;
    for c in m.components() {
        check_values(4, "momentum", c.values())?;
    }
    let neg = rho_raw.iter().fold(0.0f64, |a, &r| a.max(-r));
    if neg > 0.0 {
        clamp.events += 1;
        clamp.max = clamp.max.max(neg);
    }
    let rho = ScalarField::from_raw(grid, rho_raw.into_iter().map(|r| r.max(0.0)).collect(), "rho");
    Ok(State {
        rho,
        m,
        time,
        params: template.params,
    })
}

fn resolve_floor(state: &State, config: &SolverConfig) -> f64 {
    config.vacuum_floor.unwrap_or_else(|| default_floor(&state.rho))
}

/// Advance `state` by one step of size `dt`.
pub fn step(state: &State, config: &SolverConfig, dt: f64) -> Result<State> {
    let grid = state.grid().clone();
    let floor = resolve_floor(state, config);
    let prop = Propagator::new(&grid, state, config.scheme, dt, floor);
    let mut clamp = Clamp { events: 0, max: 0.0 };
    let next = advance(&prop, &grid, &to_spec(state), state)?;
    finish(&grid, &next, state, state.time + dt, &mut clamp)
}

fn reject_exact_vacuum(state: &State) -> Result<()> {
    if state.params.epsilon > 0.0 && state.rho.min() <= 0.0 {
        return Err(NskError::InvalidParameter(
            "a positive epsilon needs a strictly positive initial density".into(),
        ));
    }
    Ok(())
}

/// Choose the step: explicit value or CFL fraction, capped at `T/100` and
/// shrunk so that a whole number of output intervals lands on `T`.
fn choose_dt(state: &State, config: &SolverConfig, floor: f64) -> Result<(f64, Option<String>)> {
    let limit = stability_limit(state, config.scheme, floor)?;
    let (raw, warning) = match config.step {
        TimeStep::Cfl(c) => (c * limit, None),
        TimeStep::Fixed(dt) if dt > limit => match config.cfl_policy {
            CflPolicy::Abort => return Err(NskError::CflViolation { dt, limit }),
            CflPolicy::Warn => (dt, Some(format!("dt {dt:e} exceeds the stability estimate {limit:e}"))),
        },
        TimeStep::Fixed(dt) => (dt, None),
    };
    let raw = match config.step {
        TimeStep::Cfl(_) => raw.min(config.t_end / 100.0),
        TimeStep::Fixed(_) => raw.min(config.t_end),
    };
    let every = config.output_every.max(1) as f64;
    let steps = (config.t_end / raw / every * (1.0 - 1e-12)).ceil().max(1.0) * every;
    Ok((config.t_end / steps, warning))
}

/// Integrate from `state0` to `config.t_end`.
pub fn run(state0: &State, config: &SolverConfig) -> Result<RunOutput> {
    config.validate()?;
    reject_exact_vacuum(state0)?;
    let grid = state0.grid().clone();
    let floor = resolve_floor(state0, config);
    let (dt, cfl_warning) = choose_dt(state0, config, floor)?;
    let steps = (config.t_end / dt).round() as usize;
    let prop = Propagator::new(&grid, state0, config.scheme, dt, floor);

    let mut clamp = Clamp { events: 0, max: 0.0 };
    let mut spec = to_spec(state0);
    let mut state = finish(&grid, &spec, state0, state0.time, &mut clamp)?;
    let every = config.output_every.max(1);
    let mut frames = Trajectory::new(state.time, dt * every as f64, Vec::new())?;
    let mut records = Vec::new();
    let mut log = Vec::new();

    let emit = |state: &State, clamp: &Clamp, frames: &mut Trajectory<State>, records: &mut Vec<DiagnosticsRecord>| -> Result<()> {
        records.push(DiagnosticsRecord::new(state, floor, clamp.events, clamp.max)?);
        frames.push(state.clone());
        Ok(())
    };
    emit(&state, &clamp, &mut frames, &mut records)?;
    if config.track_functionals {
        log.push(StepLog {
            time: state.time,
            functionals: functionals(&state, floor)?,
        });
    }
    for n in 1..=steps {
        spec = advance(&prop, &grid, &spec, &state)?;
        state = finish(&grid, &spec, &state, state0.time + n as f64 * dt, &mut clamp)?;
        // Re-project from the real fields. This drops the non-Hermitian
        // roundoff part, which `F` cannot see but `L u` would amplify, and
        // picks up any clamped density.
        spec = to_spec(&state);
        if config.track_functionals {
            log.push(StepLog {
                time: state.time,
                functionals: functionals(&state, floor)?,
            });
        }
        if n % every == 0 {
            emit(&state, &clamp, &mut frames, &mut records)?;
        }
    }
    Ok(RunOutput {
        frames,
        records,
        log,
        dt,
        steps,
        clamp_events: clamp.events,
        max_clamp: clamp.max,
        cfl_warning,
    })
}
