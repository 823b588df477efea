//! Classical multimachine transient simulation.
//!
//! Every generator, SM or VSG, is a constant EMF behind its transient
//! reactance obeying the damped swing equation. A VSG differs only in its
//! inertia constant, which comes from the energy stored in its DC link.
//! Loads are frozen as constant impedances at the pre-fault power flow and the
//! network is Kron-reduced to the machine internal nodes once per topology.

mod events;
mod integrate;
mod machine;
mod network;
mod scenario;
mod trajectory;

use serde::{Deserialize, Serialize};

pub use events::{Action, Event, EventSchedule, NetworkConfig, NetworkMode, DEFAULT_FAULT_ADMITTANCE};
pub use integrate::{init_dynamic_state, simulate, step_rk4, DynamicSystem, SimOptions, Substeps};
pub use machine::{electrical_power, swing_rhs, vsg_equivalent_inertia, MachineDynParams};
pub use network::{NetworkModel, ReducedNetwork};
pub use scenario::{Scenario, DEFAULT_CLEAR_T, DEFAULT_DT, DEFAULT_DURATION, DEFAULT_FAULT_T};
pub use trajectory::{LossOfSynchronism, Sample, SettleRule, SettledReadings, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicState {
    /// s
    pub t: f64,
    /// Rotor (EMF) angle per machine, rad.
    pub delta: Vec<f64>,
    /// Speed deviation per machine, rad/s.
    pub omega_dev: Vec<f64>,
    pub network_mode: NetworkMode,
}

impl DynamicState {
    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.delta.iter().all(|x| x.is_finite()) && self.omega_dev.iter().all(|x| x.is_finite())
    }
}
