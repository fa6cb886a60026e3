//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys,
//! repeated keys and unparsable values are errors that carry the line
//! number.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use super::{CflPolicy, DensityProfile, InitialData, Scheme, SolverConfig, TimeStep, VelocityProfile};
use crate::error::{NskError, Result};
use crate::fields::Grid;
use crate::operators::{CoefficientSet, PhysicsParams};

pub const KEYS: &[&str] = &[
    "scheme",
    "dim",
    "n",
    "gamma",
    "epsilon",
    "coefficients",
    "density",
    "a",
    "rho_min",
    "rho_bar",
    "velocity",
    "b",
    "dt",
    "cfl",
    "cfl_policy",
    "T",
    "floor",
    "output_every",
    "output_dir",
    "snapshots",
    "seed",
    "threads",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub scheme: Scheme,
    pub dim: usize,
    pub n: usize,
    pub gamma: f64,
    pub epsilon: f64,
    pub coefficients: String,
    pub density: String,
    pub a: f64,
    pub rho_min: f64,
    pub rho_bar: f64,
    pub velocity: String,
    pub b: f64,
    pub step: TimeStep,
    pub cfl_policy: CflPolicy,
    pub t_end: f64,
    pub floor: Option<f64>,
    pub output_every: usize,
    pub output_dir: String,
    pub snapshots: bool,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Imex,
            dim: 1,
            n: 64,
            gamma: 2.0,
            epsilon: 0.1,
            coefficients: "paper".into(),
            density: "smooth-positive".into(),
            a: 0.3,
            rho_min: 1e-3,
            rho_bar: 1.0,
            velocity: "shear".into(),
            b: 0.5,
            step: TimeStep::Cfl(0.5),
            cfl_policy: CflPolicy::Warn,
            t_end: 0.1,
            floor: None,
            output_every: 10,
            output_dir: "out".into(),
            snapshots: false,
            seed: 20240601,
            threads: None,
        }
    }
}

fn err(line: usize, message: impl Into<String>) -> NskError {
    NskError::Config {
        line,
        message: message.into(),
    }
}

fn num<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| err(line, format!("cannot parse value '{v}' for key '{key}'")))
}

fn choice(line: usize, key: &str, v: &str, allowed: &[&str]) -> Result<String> {
    if allowed.contains(&v) {
        Ok(v.to_string())
    } else {
        Err(err(line, format!("'{v}' is not a valid {key} (expected one of {})", allowed.join(", "))))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        let mut dt_line = None;
        let mut cfl_line = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return Err(err(line, format!("expected 'key = value', found '{body}'")));
            };
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(err(line, format!("unknown key '{k}'")));
            }
            if let Some(prev) = seen.insert(k.to_string(), line) {
                return Err(err(line, format!("key '{k}' already set on line {prev}")));
            }
            match k {
                "scheme" => {
                    cfg.scheme = match v {
                        "rk4" => Scheme::Rk4,
                        "imex" => Scheme::Imex,
                        _ => return Err(err(line, format!("'{v}' is not a valid scheme (expected rk4 or imex)"))),
                    }
                }
                "dim" => cfg.dim = num(line, k, v)?,
                "n" => cfg.n = num(line, k, v)?,
                "gamma" => cfg.gamma = num(line, k, v)?,
                "epsilon" => cfg.epsilon = num(line, k, v)?,
                "coefficients" => cfg.coefficients = choice(line, k, v, &["paper", "quantum"])?,
                "density" => {
                    cfg.density = choice(line, k, v, &["smooth-positive", "near-vacuum", "equilibrium", "exponential"])?
                }
                "a" => cfg.a = num(line, k, v)?,
                "rho_min" => cfg.rho_min = num(line, k, v)?,
                "rho_bar" => cfg.rho_bar = num(line, k, v)?,
                "velocity" => cfg.velocity = choice(line, k, v, &["zero", "shear"])?,
                "b" => cfg.b = num(line, k, v)?,
                "dt" => {
                    cfg.step = TimeStep::Fixed(num(line, k, v)?);
                    dt_line = Some(line);
                }
                "cfl" => {
                    cfg.step = TimeStep::Cfl(num(line, k, v)?);
                    cfl_line = Some(line);
                }
                "cfl_policy" => {
                    cfg.cfl_policy = match v {
                        "warn" => CflPolicy::Warn,
                        "abort" => CflPolicy::Abort,
                        _ => return Err(err(line, format!("'{v}' is not a valid cfl_policy (expected warn or abort)"))),
                    }
                }
                "T" => cfg.t_end = num(line, k, v)?,
                "floor" => cfg.floor = Some(num(line, k, v)?),
                "output_every" => cfg.output_every = num(line, k, v)?,
                "output_dir" => cfg.output_dir = v.to_string(),
                "snapshots" => cfg.snapshots = num(line, k, v)?,
                "seed" => cfg.seed = num(line, k, v)?,
                "threads" => cfg.threads = Some(num(line, k, v)?),
                _ => unreachable!("key list and match arms agree"),
            }
        }
        if let (Some(_), Some(l)) = (dt_line, cfl_line) {
            return Err(err(l, "set either dt or cfl, not both"));
        }
        cfg.check(&seen)?;
        Ok(cfg)
    }

    /// Cross-field checks; the reported line is that of the offending key.
    fn check(&self, seen: &BTreeMap<String, usize>) -> Result<()> {
        let at = |k: &str| seen.get(k).copied().unwrap_or(0);
        self.grid().map_err(|e| err(at("n").max(at("dim")), e.to_string()))?;
        self.params().map_err(|e| {
            let l = if self.gamma <= 1.0 { at("gamma") } else { at("epsilon") };
            err(l, e.to_string())
        })?;
        if !(self.t_end > 0.0) {
            return Err(err(at("T"), "T must be positive"));
        }
        if self.output_every == 0 {
            return Err(err(at("output_every"), "output_every must be at least 1"));
        }
        match self.step {
            TimeStep::Fixed(dt) if !(dt > 0.0 && dt.is_finite()) => return Err(err(at("dt"), "dt must be positive")),
            TimeStep::Cfl(c) if !(c > 0.0 && c <= 1.0) => return Err(err(at("cfl"), "cfl must lie in (0, 1]")),
            _ => {}
        }
        if self.density == "smooth-positive" && self.a.abs() >= 1.0 {
            return Err(err(at("a"), "a must satisfy |a| < 1"));
        }
        if self.density == "near-vacuum" && self.rho_min < 1e-6 {
            return Err(err(at("rho_min"), "rho_min must be at least 1e-6"));
        }
        if self.density == "equilibrium" {
            if self.rho_bar < 0.0 {
                return Err(err(at("rho_bar"), "rho_bar must be nonnegative"));
            }
            if self.epsilon > 0.0 && self.rho_bar == 0.0 {
                return Err(err(at("rho_bar"), "a positive epsilon needs a positive density"));
            }
        }
        if self.threads == Some(0) {
            return Err(err(at("threads"), "threads must be at least 1"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, self.n)
    }

    pub fn params(&self) -> Result<PhysicsParams> {
        let coef = match self.coefficients.as_str() {
            "quantum" => CoefficientSet::quantum(),
            _ => CoefficientSet::paper(),
        };
        PhysicsParams::new(self.gamma, self.epsilon, coef)
    }

    pub fn initial(&self) -> InitialData {
        let density = match self.density.as_str() {
            "near-vacuum" => DensityProfile::NearVacuum { rho_min: self.rho_min },
            "equilibrium" => DensityProfile::Constant { value: self.rho_bar },
            "exponential" => DensityProfile::Exponential { a: self.a },
            _ => DensityProfile::SmoothPositive { a: self.a },
        };
        let velocity = match self.velocity.as_str() {
            "shear" => VelocityProfile::Shear { b: self.b },
            _ => VelocityProfile::Zero,
        };
        InitialData { density, velocity }
    }

    pub fn solver(&self) -> SolverConfig {
        let mut s = SolverConfig::new(self.scheme, self.step, self.t_end)
            .with_output_every(self.output_every)
            .with_policy(self.cfl_policy)
            .with_functionals();
        s.vacuum_floor = self.floor;
        s
    }

    /// Canonical `key = value` echo; parsing it back gives the same config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let scheme = match self.scheme {
            Scheme::Rk4 => "rk4",
            Scheme::Imex => "imex",
        };
        let _ = writeln!(s, "scheme = {scheme}");
        let _ = writeln!(s, "dim = {}", self.dim);
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "gamma = {}", self.gamma);
        let _ = writeln!(s, "epsilon = {}", self.epsilon);
        let _ = writeln!(s, "coefficients = {}", self.coefficients);
        let _ = writeln!(s, "density = {}", self.density);
        let _ = writeln!(s, "a = {}", self.a);
        let _ = writeln!(s, "rho_min = {}", self.rho_min);
        let _ = writeln!(s, "rho_bar = {}", self.rho_bar);
        let _ = writeln!(s, "velocity = {}", self.velocity);
        let _ = writeln!(s, "b = {}", self.b);
        match self.step {
            TimeStep::Fixed(dt) => {
                let _ = writeln!(s, "dt = {dt}");
            }
            TimeStep::Cfl(c) => {
                let _ = writeln!(s, "cfl = {c}");
            }
        }
        let policy = match self.cfl_policy {
            CflPolicy::Warn => "warn",
            CflPolicy::Abort => "abort",
        };
        let _ = writeln!(s, "cfl_policy = {policy}");
        let _ = writeln!(s, "T = {}", self.t_end);
        if let Some(f) = self.floor {
            let _ = writeln!(s, "floor = {f}");
        }
        let _ = writeln!(s, "output_every = {}", self.output_every);
        let _ = writeln!(s, "output_dir = {}", self.output_dir);
        let _ = writeln!(s, "snapshots = {}", self.snapshots);
        let _ = writeln!(s, "seed = {}", self.seed);
        if let Some(t) = self.threads {
            let _ = writeln!(s, "threads = {t}");
        }
        s
    }
}
