//! The atomic picture of a mixed SM/VSG grid.
//!
//! Generators become particles: an SM carries its rotor inertia as mass, a
//! VSG the (far smaller) inertia-equivalent of its DC-link energy. Particles
//! are placed by embedding the Thevenin distances between their buses, the
//! heavy SMs form a "nucleus" around the center of mass, and each VSG's
//! settled voltage gap from that nucleus is counted in voltage quanta.

mod geometry;
mod mass;
mod orbit;
mod particles;

use serde::{Deserialize, Serialize};

pub use geometry::{distance_matrix, electrical_distance, embed_coordinates, thevenin_zbus, Embedding};
pub use mass::{capacitor_energy, cylinder_moment, inertia_constant, particle_masses, stored_energy};
pub use orbit::{
    activation_energy, orbit_report, orbit_report_from_readings, settled_generator_readings, unit_energy,
    ActivationRecord, ClusterReference, Gap, GenReading, OrbitReport, DEFAULT_Q_UNIT, REPORT_RESOLUTION,
};
pub use particles::{
    build_particles, build_particles_with, center_of_mass, com_displacement, sweep, CenterOfMass, Displacement,
    Particle, ParticleSet, SweepPoint,
};

use crate::dynamics::{Action, EventSchedule, LossOfSynchronism, SettleRule, Trajectory};
use crate::error::{Error, Result};
use crate::grid_model::{BusId, NetworkCase};

/// Which network the orbital radii are measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusNetwork {
    #[default]
    Prefault,
    /// The network left after every branch trip in the schedule.
    Postfault,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub q_unit: f64,
    pub embed_dim: usize,
    pub settle: SettleRule,
    pub reference: ClusterReference,
    pub radius_network: RadiusNetwork,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            q_unit: DEFAULT_Q_UNIT,
            embed_dim: 2,
            settle: SettleRule::default(),
            reference: ClusterReference::Mean,
            radius_network: RadiusNetwork::Prefault,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OrbitOutcome {
    Settled(OrbitReport),
    NotSettled {
        t_end: f64,
        quantity: String,
        peak_to_peak: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomicReport {
    pub case: String,
    pub particles: Vec<Particle>,
    pub embedding_padded: bool,
    pub com: CenterOfMass,
    pub orbit_report: OrbitOutcome,
    pub activation: Vec<ActivationRecord>,
    pub loss_of_synchronism: Option<LossOfSynchronism>,
    pub warnings: Vec<String>,
}

/// Full atomic analysis of one simulated scenario.
pub fn analyze(
    case: &NetworkCase,
    schedule: &EventSchedule,
    traj: &Trajectory,
    opts: &AnalysisOptions,
) -> Result<AtomicReport> {
    let tripped: Vec<(BusId, BusId)> = match opts.radius_network {
        RadiusNetwork::Prefault => vec![],
        RadiusNetwork::Postfault => schedule
            .events()
            .iter()
            .filter_map(|e| match e.action {
                Action::TripBranch { from, to } => Some((from, to)),
                _ => None,
            })
            .collect(),
    };
    let z_radius = thevenin_zbus(case, &tripped)?;
    let particles = build_particles(case, opts.embed_dim)?;
    let com = center_of_mass(&particles)?;

    let mut warnings = Vec::new();
    if particles.padded {
        warnings.push(format!(
            "generator distances span fewer than {} dimensions; trailing coordinates are zero",
            opts.embed_dim
        ));
    }
    if let Some(los) = &traj.loss_of_synchronism {
        warnings.push(format!(
            "loss of synchronism: generator {} at t = {} s",
            los.generator, los.t
        ));
    }

    let orbit = match orbit_report(traj, case, opts.q_unit, &z_radius, opts.reference, &opts.settle) {
        Ok(r) => OrbitOutcome::Settled(r),
        Err(Error::NotSettled {
            t_end,
            quantity,
            peak_to_peak,
        }) => {
            warnings.push(format!("trajectory not settled at t = {t_end} s: {quantity}"));
            OrbitOutcome::NotSettled {
                t_end,
                quantity,
                peak_to_peak,
            }
        }
        Err(e) => return Err(e),
    };

    let t_end = traj.t_end();
    let t_before = schedule.events().first().map_or(t_end, |e| (e.t - traj.dt).max(0.0));
    let mut activation = Vec::new();
    for gen in &traj.gen_labels {
        match activation_energy(traj, gen, t_before, t_end, &opts.settle) {
            Ok(r) => activation.push(r),
            Err(Error::NotSettled { .. }) => {
                warnings.push("activation energies skipped: windows not settled".into());
                activation.clear();
                break;
            }
            Err(e) => return Err(e),
        }
    }

    Ok(AtomicReport {
        case: case.name.clone(),
        particles: particles.particles,
        embedding_padded: particles.padded,
        com,
        orbit_report: orbit,
        activation,
        loss_of_synchronism: traj.loss_of_synchronism.clone(),
        warnings,
    })
}
