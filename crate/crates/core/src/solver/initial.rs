use std::f64::consts::PI;

use serde::Serialize;

use super::State;
use crate::error::{NskError, Result};
use crate::fields::{Grid, ScalarField, VectorField};
use crate::operators::PhysicsParams;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum DensityProfile {
    /// `1 + a cos(2 pi x_1)`, `|a| < 1`.
    SmoothPositive { a: f64 },
    /// `rho_min + sin^4(pi x_1)`, `rho_min >= 1e-6`.
    NearVacuum { rho_min: f64 },
    Constant { value: f64 },
    /// `exp(a cos(2 pi x_1))`, a wide-range positive density.
    Exponential { a: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum VelocityProfile {
    Zero,
    /// `u = (b sin(2 pi x_2), 0, 0)`; in 1D the profile uses `x_1`.
    Shear { b: f64 },
    /// Constant velocity.
    Uniform { v: [f64; 3] },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InitialData {
    pub density: DensityProfile,
    pub velocity: VelocityProfile,
}

impl InitialData {
    pub fn smooth_shear(a: f64, b: f64) -> Self {
        Self {
            density: DensityProfile::SmoothPositive { a },
            velocity: VelocityProfile::Shear { b },
        }
    }

    pub fn equilibrium(value: f64) -> Self {
        Self {
            density: DensityProfile::Constant { value },
            velocity: VelocityProfile::Zero,
        }
    }
}

/// Sample a preset; momentum is `rho0 u0`.
pub fn initial_data(grid: &Grid, data: &InitialData, params: PhysicsParams) -> Result<State> {
    let rho = match data.density {
        DensityProfile::SmoothPositive { a } => {
            if a.abs() >= 1.0 {
                return Err(NskError::InvalidParameter(format!("|a| must be below 1 (got {a})")));
            }
            ScalarField::from_fn(grid, |x| 1.0 + a * (2.0 * PI * x[0]).cos())
        }
        DensityProfile::NearVacuum { rho_min } => {
            if rho_min < 1e-6 {
                return Err(NskError::InvalidParameter(format!(
                    "near-vacuum floor must be at least 1e-6 (got {rho_min})"
                )));
            }
            ScalarField::from_fn(grid, |x| rho_min + (PI * x[0]).sin().powi(4))
        }
        DensityProfile::Constant { value } => {
            if value < 0.0 {
                return Err(NskError::NegativeDensity { min: value });
            }
            ScalarField::constant(grid, value)
        }
        DensityProfile::Exponential { a } => ScalarField::from_fn(grid, |x| (a * (2.0 * PI * x[0]).cos()).exp()),
    };
    let d = grid.dim();
    let u = match data.velocity {
        VelocityProfile::Zero => VectorField::zeros(grid),
        VelocityProfile::Shear { b } => VectorField::from_fn(grid, |x| {
            let mut v = vec![0.0; d];
            v[0] = b * (2.0 * PI * x[if d > 1 { 1 } else { 0 }]).sin();
            v
        }),
        VelocityProfile::Uniform { v } => VectorField::constant(grid, &v),
    };
    State::from_velocity(rho.named("rho"), &u, 0.0, params)
}
