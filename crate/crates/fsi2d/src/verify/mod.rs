//! Executable checks of the scheme's provable properties: the
//! gradient-energy equality on deformed domains, the decay of the gap
//! between the two interface velocity channels, temporal self-convergence,
//! and the piecewise-linear interpolant bounds. All quadrature in here is
//! independent of the finite-element assembly path.

pub mod convergence;
pub mod hyperdual;
pub mod interpolant;
pub mod korn;

pub use convergence::{
    interface_velocity_gap, log_log_slope, temporal_self_convergence, v_vstar_gap_rate, GapRate,
    SelfConvergence, ShiftSeries,
};
pub use interpolant::{interpolant_check, InterpolantReport};
pub use korn::{korn_check, korn_mismatch, KornReport, ManufacturedField, WallShape};
