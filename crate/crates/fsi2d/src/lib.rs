//! A 2D moving-boundary fluid-structure interaction solver.
//!
//! An incompressible viscous fluid flows through a symmetric channel whose
//! upper wall is a two-layer elastic structure: a thin membrane with mass in
//! contact with the fluid, and a thick linearly elastic layer on top of it.
//! The flow is driven by dynamic-pressure data at the channel ends.
//!
//! Time integration splits each step into an implicit elastodynamics solve
//! for the coupled thin+thick wall followed by a linearized fluid solve on
//! the fixed reference domain, with the interface inertia entering the fluid
//! system as a Robin-type boundary term. The scheme satisfies discrete
//! energy balances that are checked, per step, to solver precision; the
//! energy ledger produced by every run is the primary correctness artifact.

pub mod ale;
pub mod driver;
pub mod energy;
pub mod error;
pub mod fem;
pub mod fluid;
pub mod io;
pub mod mesh;
pub mod state;
pub mod structure;
pub mod verify;

pub use error::{Error, Result};
