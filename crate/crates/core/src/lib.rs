#![cfg_attr(not(test), no_std)]

//! Regularized Hermite moment method for the Vlasov–Poisson and
//! Vlasov–Poisson–BGK equations in one spatial dimension.
//!
//! The distribution function in every cell is stored as a truncated series
//! of Hermite functions centred at the local macroscopic velocity and scaled
//! by the local thermal velocity. Transport uses an HLL finite-volume flux
//! with Hermite-zero signal speeds plus a hyperbolicity-restoring correction
//! on the top-order coefficients; the electric field enters as a shift of the
//! expansion centre and BGK collisions as an exact exponential relaxation.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration
//! parsing and the command-line front end live in `hermite-vlasov-cli`.

extern crate alloc;

pub mod analysis;
pub mod convection;
mod error;
pub mod fields;
pub mod hermite;
mod math;
pub mod moments;
pub mod projection;
pub mod simulation;
#[cfg(test)]
mod testutil;

pub use crate::analysis::{
    detect_recurrence, extrapolate_rate, find_peaks, fit_damping_rate, moment_convergence,
    DampingFit, ExtrapolationFit, MomentConvergence,
};
pub use crate::convection::{convection_step, hll_flux, regularization_increment, signal_speeds};
pub use crate::error::Error;
pub use crate::fields::{
    acceleration_step, bgk_step, electric_field, solve_periodic_laplacian, solve_poisson,
    ChargeParams, FieldState,
};
pub use crate::hermite::{greatest_zero, hermite_eval, quadrature, QuadratureRule};
pub use crate::moments::{
    derived_moments, eval_distribution, index_set, macroscopic, maxwellian_cell, CellState,
    GridState, IndexSet, Macroscopic, MultiIndex, MAX_DIM,
};
pub use crate::projection::{multiply_v1_truncate, project, reexpand_equilibrium};
pub use crate::simulation::{
    cfl_timestep, diagnostics, initialize, run, Closure, EnergyTrace, SimConfig, Simulation,
    TraceRow,
};

pub type Result<T, E = Error> = core::result::Result<T, E>;
