//! Functionals, inequalities, norm tables, weak residuals and remainders
//! evaluated on states and trajectories.

mod functionals;
pub mod inequality;
mod norms;
mod remainder;
mod weak;

pub use functionals::{
    bd_entropy, dissipation, effective_velocity, energy, functionals, tensor_t, tensor_t_identity_residual,
    DiagnosticsRecord, Dissipation, Functionals, BD_FROZEN_C,
};
pub use inequality::{
    bd_bound, bd_identity_defect, bd_inequality, calibrate, energy_inequality, BdBoundReport, InequalityReport,
    BD_TOLERANCE_C, ENERGY_TOLERANCE_C,
};
pub use norms::{aggregate, instant_norms, norm_table, NormRow, NormSpec, TimeNorm, NORMS};
pub use remainder::{
    envelope_shape, rbar_remainder, rbar_sweep, remainder, remainder_sweep, stress_state, RemainderReport,
};
pub use weak::{product_weights, test_battery, weak_residual_continuity, weak_residual_momentum, TrigTest};
