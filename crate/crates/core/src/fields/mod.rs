//! Periodic grids and spectrally differentiated fields.

mod grid;
pub mod io;
mod scalar;
mod trajectory;
mod vector;

pub use grid::{Grid, DEFAULT_MAX_N_3D, DEFAULT_MAX_POINTS};
pub use scalar::ScalarField;
pub use trajectory::Trajectory;
pub use vector::{TensorField, VectorField};
