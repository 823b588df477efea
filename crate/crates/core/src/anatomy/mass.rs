use crate::grid_model::{GenModel, Generator, NetworkCase};

/// Moment of inertia of a solid cylinder about its axis, kg·m².
pub fn cylinder_moment(m: f64, r: f64) -> f64 {
    0.5 * m * r * r
}

/// Inertia constant H = J·ω_s² / (2·S), s. `s_rated` in VA.
pub fn inertia_constant(j: f64, omega_s: f64, s_rated: f64) -> f64 {
    j * omega_s * omega_s / (2.0 * s_rated)
}

/// E = ½·C·V², J.
pub fn capacitor_energy(c: f64, v: f64) -> f64 {
    0.5 * c * v * v
}

/// Energy the unit stores at synchronous speed, J: rotor kinetic energy for
/// an SM, DC-link energy for a VSG.
pub fn stored_energy(gen: &Generator) -> f64 {
    match &gen.model {
        GenModel::Sm(p) => p.h * gen.s_rated * 1e6,
        GenModel::Vsg(p) => capacitor_energy(p.c_dc, p.v_dc),
    }
}

/// Mass of every generator as 2·E_stored/ω_s², i.e. the moment of inertia
/// that would store the same energy at synchronous speed (kg·m²). For an SM
/// this is its rotor inertia J; for a VSG it is c·v²/ω_s².
pub fn particle_masses(case: &NetworkCase) -> Vec<f64> {
    let ws = case.omega_s();
    case.generators
        .iter()
        .map(|g| 2.0 * stored_energy(g) / (ws * ws))
        .collect()
}
