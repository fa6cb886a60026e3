//! Numerical laboratory for the compressible Navier-Stokes-Korteweg system
//! with drag on the periodic torus.

pub mod diagnostics;
pub mod error;
pub mod fields;
pub mod mollify;
pub mod operators;
pub mod solver;
pub mod truncations;

pub use error::{NskError, Result};
