//! Network data: buses, branches, generator fleet, case files and the
//! admittance/impedance matrices built from them.

mod builtin;
mod case;
mod io;
mod matrix;

pub use builtin::{builtin_case, builtin_overlay, builtin_overlay_names, BUILTIN_CASES};
pub use case::{
    Branch, Bus, BusId, BusKind, GenKind, GenModel, Generator, NetworkCase, SmParams, VsgParams, DEFAULT_SM_DAMPING,
    DEFAULT_VSG_DAMPING,
};
pub use io::{apply_overlay, parse_case, parse_overlay, serialize_case, Overlay, OverlayPatch};
pub(crate) use matrix::checked_lu;
pub use matrix::{
    build_admittance, generator_grounding, kron_reduce, zbus, AdmittanceMatrix, ImpedanceMatrix, Node, Shunt,
};
