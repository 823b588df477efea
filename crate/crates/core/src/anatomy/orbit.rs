use serde::{Deserialize, Serialize};

use super::geometry::electrical_distance;
use crate::dynamics::{SettleRule, Trajectory};
use crate::error::{Error, Result};
use crate::grid_model::{BusId, GenKind, GenModel, ImpedanceMatrix, NetworkCase};

/// Default size of one voltage "quantum", p.u.
pub const DEFAULT_Q_UNIT: f64 = 0.001;

/// Settled voltages, spreads and gaps are reported on a 1e-6 p.u. grid, so
/// comparisons against three-decimal thresholds are not decided by
/// floating-point noise.
pub const REPORT_RESOLUTION: f64 = 1e-6;

pub(crate) fn on_grid(x: f64) -> f64 {
    (x / REPORT_RESOLUTION).round() / (1.0 / REPORT_RESOLUTION)
}

/// What a VSG voltage is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterReference {
    /// Mean settled voltage of all SMs.
    #[default]
    Mean,
    /// Settled voltage of the electrically nearest SM.
    Nearest,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenReading {
    pub gen: String,
    pub bus: BusId,
    pub kind: GenKind,
    /// Settled terminal voltage, p.u.
    pub v: f64,
    /// Settled electrical power, MW.
    pub p_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gap {
    pub gen: String,
    pub bus: BusId,
    /// V_vsg − V_reference, p.u.
    pub delta_v: f64,
    /// P_vsg − P_reference, MW.
    pub delta_p_mw: f64,
    /// Electrically nearest SM bus.
    pub nearest_sm_bus: BusId,
    /// Thevenin distance to `nearest_sm_bus`, p.u.
    pub radius: f64,
    /// round(|delta_v| / q_unit)
    pub n: u64,
}

/// SMs form the nucleus; every VSG sits on an orbit whose level is its
/// settled voltage gap from the nucleus, counted in units of `q_unit`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitReport {
    pub nucleus: Vec<GenReading>,
    pub orbitals: Vec<GenReading>,
    /// Largest pairwise |ΔV| among SMs, p.u.
    pub sm_spread: f64,
    pub gaps: Vec<Gap>,
    pub quantum_numbers: Vec<u64>,
    pub q_unit: f64,
    pub reference: ClusterReference,
}

/// Build the report from already-settled readings. `z` supplies the radii.
pub fn orbit_report_from_readings(
    readings: Vec<GenReading>,
    q_unit: f64,
    reference: ClusterReference,
    z: &ImpedanceMatrix,
) -> Result<OrbitReport> {
    if !(q_unit.is_finite() && q_unit > 0.0) {
        return Err(Error::InvalidInput(format!("q_unit {q_unit} must be positive")));
    }
    let readings: Vec<GenReading> = readings
        .into_iter()
        .map(|r| GenReading { v: on_grid(r.v), ..r })
        .collect();
    let (nucleus, orbitals): (Vec<_>, Vec<_>) = readings.into_iter().partition(|r| r.kind == GenKind::Sm);

    let (lo, hi) = nucleus.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.v), hi.max(r.v))
    });
    let sm_spread = if nucleus.is_empty() { 0.0 } else { on_grid(hi - lo) };

    let mut gaps = Vec::new();
    if !nucleus.is_empty() {
        let count = nucleus.len() as f64;
        let v_mean = nucleus.iter().map(|r| r.v).sum::<f64>() / count;
        let p_mean = nucleus.iter().map(|r| r.p_mw).sum::<f64>() / count;
        for o in &orbitals {
            // Nearest SM by Thevenin distance, ties to the lowest bus id.
            let mut best: Option<(f64, &GenReading)> = None;
            for s in &nucleus {
                let d = electrical_distance(z, o.bus, s.bus)?;
                best = match best {
                    Some((bd, b)) if bd < d || (bd == d && b.bus <= s.bus) => Some((bd, b)),
                    _ => Some((d, s)),
                };
            }
            let (radius, near) = best.expect("nucleus is non-empty");
            let (v_ref, p_ref) = match reference {
                ClusterReference::Mean => (v_mean, p_mean),
                ClusterReference::Nearest => (near.v, near.p_mw),
            };
            let delta_v = on_grid(o.v - v_ref);
            gaps.push(Gap {
                gen: o.gen.clone(),
                bus: o.bus,
                delta_v,
                delta_p_mw: o.p_mw - p_ref,
                nearest_sm_bus: near.bus,
                radius,
                n: (delta_v.abs() / q_unit).round() as u64,
            });
        }
    }
    Ok(OrbitReport {
        quantum_numbers: gaps.iter().map(|g| g.n).collect(),
        nucleus,
        orbitals,
        sm_spread,
        gaps,
        q_unit,
        reference,
    })
}

/// Settled terminal readings of every generator over the final window of
/// `traj`.
pub fn settled_generator_readings(traj: &Trajectory, rule: &SettleRule) -> Result<Vec<GenReading>> {
    let s = traj.settled_final(rule)?;
    Ok(traj
        .gen_labels
        .iter()
        .enumerate()
        .map(|(k, gen)| GenReading {
            gen: gen.clone(),
            bus: traj.gen_buses[k],
            kind: traj.gen_models[k].kind(),
            v: s.v_bus[traj
                .bus_position(traj.gen_buses[k])
                .expect("generator bus in trajectory")],
            p_mw: s.p_e[k] * traj.base_mva,
        })
        .collect())
}

/// Orbit report from the final settled window of a simulation. An unsettled
/// run yields [`Error::NotSettled`] and no numbers.
pub fn orbit_report(
    traj: &Trajectory,
    case: &NetworkCase,
    q_unit: f64,
    z: &ImpedanceMatrix,
    reference: ClusterReference,
    rule: &SettleRule,
) -> Result<OrbitReport> {
    if traj.gen_buses != case.generators.iter().map(|g| g.bus).collect::<Vec<_>>() {
        return Err(Error::InvalidInput(
            "trajectory and case have different generators".into(),
        ));
    }
    orbit_report_from_readings(settled_generator_readings(traj, rule)?, q_unit, reference, z)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActivationRecord {
    pub gen: String,
    pub kind: GenKind,
    /// J
    pub e_before: f64,
    /// J
    pub e_after: f64,
    /// e_after − e_before, J
    pub delta_e: f64,
    /// Settled speed deviation after the event, Hz.
    pub freq_dev: f64,
}

/// Energy held by one unit at a settled operating point, J. A VSG's DC-link
/// voltage is taken to scale linearly with its terminal voltage, so
/// E = ½·C·(v_dc·|V|)²; an SM holds ½·J·(ω_s + ω_dev)².
pub fn unit_energy(model: &GenModel, s_rated_mva: f64, omega_s: f64, v_term: f64, omega_dev: f64) -> f64 {
    match model {
        GenModel::Vsg(p) => super::mass::capacitor_energy(p.c_dc, p.v_dc * v_term),
        GenModel::Sm(p) => {
            let j = 2.0 * p.h * s_rated_mva * 1e6 / (omega_s * omega_s);
            0.5 * j * (omega_s + omega_dev).powi(2)
        }
    }
}

/// Energy change of generator `gen` between the settled windows ending at
/// `t_before` and `t_after`.
pub fn activation_energy(
    traj: &Trajectory,
    gen: &str,
    t_before: f64,
    t_after: f64,
    rule: &SettleRule,
) -> Result<ActivationRecord> {
    let k = traj
        .gen_labels
        .iter()
        .position(|g| g == gen)
        .ok_or_else(|| Error::InvalidInput(format!("no generator `{gen}` in the trajectory")))?;
    let bus = traj
        .bus_position(traj.gen_buses[k])
        .expect("generator bus in trajectory");
    let model = &traj.gen_models[k];
    let s_rated = traj.machines[k].s_rated;
    let energy = |t: f64| -> Result<(f64, f64)> {
        let s = traj.settled(t, rule)?;
        let w = s.omega_dev[k];
        Ok((unit_energy(model, s_rated, traj.omega_s, s.v_bus[bus], w), w))
    };
    let (e_before, _) = energy(t_before)?;
    let (e_after, w_after) = energy(t_after)?;
    Ok(ActivationRecord {
        gen: gen.to_string(),
        kind: model.kind(),
        e_before,
        e_after,
        delta_e: e_after - e_before,
        freq_dev: w_after / (2.0 * std::f64::consts::PI),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anatomy::thevenin_zbus;
    use crate::grid_model::builtin_case;

    fn reading(bus: u32, kind: GenKind, v: f64) -> GenReading {
        GenReading {
            gen: bus.to_string(),
            bus: BusId(bus),
            kind,
            v,
            p_mw: 100.0,
        }
    }

    #[test]
    fn table_one_case_one_arithmetic() {
        let z = thevenin_zbus(&builtin_case("ieee9").unwrap(), &[]).unwrap();
        let r = orbit_report_from_readings(
            vec![
                reading(2, GenKind::Vsg, 1.006),
                reading(3, GenKind::Sm, 0.997),
                reading(1, GenKind::Sm, 0.993),
            ],
            DEFAULT_Q_UNIT,
            ClusterReference::Mean,
            &z,
        )
        .unwrap();
        assert_eq!(r.sm_spread, 0.004);
        assert!(r.sm_spread <= 0.005);
        assert_eq!(r.gaps[0].delta_v, 0.011);
        assert_eq!(r.quantum_numbers, vec![11]);
        assert_eq!(r.nucleus.len() + r.orbitals.len(), 3);

        let doubled = orbit_report_from_readings(
            r.nucleus.iter().chain(&r.orbitals).cloned().collect(),
            0.002,
            ClusterReference::Mean,
            &z,
        )
        .unwrap();
        assert_eq!(doubled.quantum_numbers, vec![6]);
    }

    #[test]
    fn three_decimal_spread_is_exact() {
        let z = thevenin_zbus(&builtin_case("ieee9").unwrap(), &[]).unwrap();
        let r = orbit_report_from_readings(
            vec![reading(1, GenKind::Sm, 0.976), reading(3, GenKind::Sm, 0.971)],
            DEFAULT_Q_UNIT,
            ClusterReference::Mean,
            &z,
        )
        .unwrap();
        assert!(r.sm_spread <= 0.005);
        assert!(r.orbitals.is_empty() && r.gaps.is_empty());
    }

    #[test]
    fn nearest_reference_uses_closest_sm() {
        let case = builtin_case("ieee9").unwrap();
        let z = thevenin_zbus(&case, &[]).unwrap();
        let r = orbit_report_from_readings(
            vec![
                reading(2, GenKind::Vsg, 1.0),
                reading(3, GenKind::Sm, 0.99),
                reading(1, GenKind::Sm, 0.95),
            ],
            DEFAULT_Q_UNIT,
            ClusterReference::Nearest,
            &z,
        )
        .unwrap();
        let g = &r.gaps[0];
        let d1 = electrical_distance(&z, BusId(2), BusId(1)).unwrap();
        let d3 = electrical_distance(&z, BusId(2), BusId(3)).unwrap();
        let (near, v) = if d3 < d1 { (3, 0.99) } else { (1, 0.95) };
        assert_eq!(g.nearest_sm_bus, BusId(near));
        assert!((g.delta_v - on_grid(1.0 - v)).abs() < 1e-15);
        assert_eq!(g.radius, d1.min(d3));
    }

    #[test]
    fn energy_conventions() {
        let ws = 2.0 * std::f64::consts::PI * 60.0;
        let sm = GenModel::default_for(GenKind::Sm);
        let e0 = unit_energy(&sm, 100.0, ws, 1.0, 0.0);
        assert!((e0 - 5.0 * 100e6).abs() < 1e-3);
        // Speed matters, angle and voltage do not.
        assert_eq!(unit_energy(&sm, 100.0, ws, 0.9, 0.0), e0);
        let vsg = GenModel::default_for(GenKind::Vsg);
        let ev = unit_energy(&vsg, 100.0, ws, 1.0, 0.0);
        assert!((ev - 0.5e6).abs() < 1e-6);
        assert!((unit_energy(&vsg, 100.0, ws, 1.1, 3.0) - 0.5e6 * 1.21).abs() < 1e-6);
    }
}
