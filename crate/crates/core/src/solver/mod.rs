//! Time integration of the regularized system for `(rho, m)`.

pub mod config;
mod initial;
mod linear;
mod rhs;
mod stepper;

pub use initial::{initial_data, DensityProfile, InitialData, VelocityProfile};
pub use linear::LinearOperator;
pub use rhs::{rhs, RhsTerms};
pub use stepper::{
    run, stability_limit, step, CflPolicy, RunOutput, Scheme, SolverConfig, StepLog, TimeStep,
};

use crate::error::{NskError, Result};
use crate::fields::{Grid, ScalarField, VectorField};
use crate::operators::{checked_density, PhysicsParams};

/// Relative vacuum floor used when none is configured.
pub const DEFAULT_RELATIVE_FLOOR: f64 = 1e-10;

/// Density, momentum, time and the physical parameters.
#[derive(Clone, Debug)]
pub struct State {
    pub rho: ScalarField,
    pub m: VectorField,
    pub time: f64,
    pub params: PhysicsParams,
}

impl State {
    /// Validates shapes, finiteness and `rho >= 0` (tiny negatives are clamped).
    pub fn new(rho: ScalarField, m: VectorField, time: f64, params: PhysicsParams) -> Result<Self> {
        rho.check_finite()?;
        m.check_finite()?;
        if rho.grid() != m.grid() {
            return Err(NskError::GridMismatch {
                left: rho.grid().to_string(),
                right: m.grid().to_string(),
            });
        }
        let rho = checked_density(&rho)?.named("rho");
        Ok(Self { rho, m, time, params })
    }

    /// Build from density and velocity, `m = rho u`.
    pub fn from_velocity(rho: ScalarField, u: &VectorField, time: f64, params: PhysicsParams) -> Result<Self> {
        let m = u.times(&rho);
        Self::new(rho, m, time, params)
    }

    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }

    pub fn mass(&self) -> f64 {
        self.rho.integrate()
    }

    pub fn momentum(&self) -> Vec<f64> {
        self.m.integrate()
    }

    /// Velocity with the default floor.
    pub fn velocity(&self) -> VectorField {
        velocity_from(self, None)
    }

    /// Max-norm distance between two states on the same grid.
    pub fn distance(&self, other: &State) -> f64 {
        let dr = (&self.rho - &other.rho).max_abs();
        let dm = self.m.sub(&other.m).max_abs();
        dr.max(dm)
    }
}

/// Default floor `1e-10 max rho`.
pub fn default_floor(rho: &ScalarField) -> f64 {
    DEFAULT_RELATIVE_FLOOR * rho.max().max(0.0)
}

/// `u = m / rho` where `rho > floor`, 0 elsewhere.
pub fn velocity_from(state: &State, floor: Option<f64>) -> VectorField {
    velocity_of(&state.rho, &state.m, floor.unwrap_or_else(|| default_floor(&state.rho)))
}

pub(crate) fn velocity_of(rho: &ScalarField, m: &VectorField, floor: f64) -> VectorField {
    m.map_components(|_, c| {
        c.zip_map(rho, |mi, r| if r > floor && r > 0.0 { mi / r } else { 0.0 })
    })
}
