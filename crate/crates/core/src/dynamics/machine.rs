use crate::grid_model::AdmittanceMatrix;

use super::DynamicState;

/// Classical-model parameters of one machine. `h_eff` and `d` are on the
/// machine rating `s_rated`; powers handed to [`swing_rhs`] are p.u. on the
/// system base `base_mva`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachineDynParams {
    /// s
    pub h_eff: f64,
    /// p.u. power per p.u. speed
    pub d: f64,
    /// Internal EMF magnitude, p.u.
    pub e_internal: f64,
    /// p.u. on `s_rated`
    pub xd_prime: f64,
    /// MVA
    pub s_rated: f64,
    /// MVA
    pub base_mva: f64,
    /// rad/s
    pub omega_s: f64,
    /// Mechanical power, p.u. on the system base.
    pub p_m: f64,
}

impl MachineDynParams {
    /// Inertia constant on the system base, s.
    pub fn h_system(&self) -> f64 {
        self.h_eff * self.s_rated / self.base_mva
    }

    pub fn d_system(&self) -> f64 {
        self.d * self.s_rated / self.base_mva
    }
}

/// Equivalent inertia constant of a VSG whose virtual inertia is backed by its
/// DC-link capacitor: stored energy ½·C·V² over the rating.
pub fn vsg_equivalent_inertia(c_dc: f64, v_dc: f64, s_rated_mva: f64, _omega_s: f64) -> f64 {
    0.5 * c_dc * v_dc * v_dc / (s_rated_mva * 1e6)
}

/// Right-hand side of the swing equation with damping:
///
/// ```text
/// dδ/dt = ω_dev
/// dω/dt = ω_s/(2H)·(P_m − P_e) − D/(2H)·ω_dev
/// ```
pub fn swing_rhs(state: &DynamicState, params: &[MachineDynParams], p_e: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut dd = vec![0.0; params.len()];
    let mut dw = vec![0.0; params.len()];
    swing_rhs_into(&state.omega_dev, params, p_e, &mut dd, &mut dw);
    (dd, dw)
}

pub(crate) fn swing_rhs_into(
    omega_dev: &[f64],
    params: &[MachineDynParams],
    p_e: &[f64],
    dd: &mut [f64],
    dw: &mut [f64],
) {
    for (k, m) in params.iter().enumerate() {
        let h = m.h_system();
        dd[k] = omega_dev[k];
        dw[k] = m.omega_s / (2.0 * h) * (m.p_m - p_e[k]) - m.d_system() / (2.0 * h) * omega_dev[k];
    }
}

/// Electrical power out of each internal node of a network reduced to the
/// machine EMFs, p.u. on the system base.
pub fn electrical_power(delta: &[f64], e: &[f64], y_red: &AdmittanceMatrix) -> Vec<f64> {
    let mut pe = vec![0.0; delta.len()];
    let g: Vec<f64> = y_red.y.iter().map(|y| y.re).collect();
    let b: Vec<f64> = y_red.y.iter().map(|y| y.im).collect();
    electrical_power_into(delta, e, &g, &b, &mut pe);
    pe
}

/// `g` and `b` are column-major like the nalgebra storage.
pub(crate) fn electrical_power_into(delta: &[f64], e: &[f64], g: &[f64], b: &[f64], pe: &mut [f64]) {
    let m = delta.len();
    let sc: Vec<(f64, f64)> = delta.iter().map(|d| d.sin_cos()).collect();
    for i in 0..m {
        let (si, ci) = sc[i];
        let mut acc = e[i] * e[i] * g[i + i * m];
        for j in 0..m {
            if j == i {
                continue;
            }
            let (sj, cj) = sc[j];
            let sin_ij = si * cj - ci * sj;
            let cos_ij = ci * cj + si * sj;
            acc += e[i] * e[j] * (b[i + j * m] * sin_ij + g[i + j * m] * cos_ij);
        }
        pe[i] = acc;
    }
}
