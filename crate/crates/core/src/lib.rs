//! Transient simulation and "atomic anatomy" analysis of power systems that
//! mix synchronous machines (SM) with virtual synchronous generators (VSG).
//!
//! The crate is organized bottom-up:
//!
//! * [`grid_model`]: case data, built-in IEEE 9/39-bus systems, Y-bus, Kron
//!   reduction and Z-bus.
//! * [`powerflow`]: Newton-Raphson AC power flow for the pre-fault state.
//! * [`dynamics`]: classical multimachine swing model integrated with RK4
//!   through fault apply/clear events.
//! * [`anatomy`]: inertial masses, impedance-based coordinates, center of
//!   mass, orbit reports and activation energies.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anatomy;
pub mod dynamics;
pub mod error;
pub mod grid_model;
pub mod powerflow;

pub use dynamics::{simulate, EventSchedule, Scenario, Trajectory};
pub use error::{Error, Result};
pub use grid_model::{builtin_case, BusId, BusKind, GenKind, GenModel, Generator, NetworkCase, SmParams, VsgParams};
pub use num_complex::Complex64;
pub use powerflow::{solve_powerflow, PowerFlowOptions, PowerFlowSolution};
