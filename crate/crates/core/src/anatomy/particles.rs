use serde::Serialize;

use super::geometry::{distance_matrix, embed_coordinates, euclid, thevenin_zbus, Embedding};
use super::mass::particle_masses;
use crate::error::{Error, Result};
use crate::grid_model::{BusId, GenKind, NetworkCase};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Particle {
    pub gen: String,
    pub bus: BusId,
    pub kind: GenKind,
    /// kg·m²
    pub mass: f64,
    pub coord: Vec<f64>,
}

/// Generators as point masses placed in electrical-distance space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParticleSet {
    pub particles: Vec<Particle>,
    pub dim: usize,
    /// The embedding had fewer positive axes than `dim`.
    pub padded: bool,
}

impl ParticleSet {
    pub fn new(particles: Vec<Particle>, padded: bool) -> Result<Self> {
        let dim = particles
            .first()
            .map(|p| p.coord.len())
            .ok_or_else(|| Error::InvalidInput("particle set is empty".into()))?;
        if particles.iter().any(|p| p.coord.len() != dim) {
            return Err(Error::InvalidInput("particles have mixed coordinate dimensions".into()));
        }
        if particles
            .iter()
            .any(|p| !(p.mass >= 0.0 && p.mass.is_finite()) || p.coord.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::InvalidInput(
                "particle masses must be finite and >= 0, coordinates finite".into(),
            ));
        }
        if !particles.iter().any(|p| p.mass > 0.0) {
            return Err(Error::InvalidInput(
                "at least one particle needs a positive mass".into(),
            ));
        }
        Ok(ParticleSet { particles, dim, padded })
    }

    /// Same particles with masses recomputed from `case` (whose generators
    /// must sit on the same buses in the same order).
    pub fn with_masses_from(&self, case: &NetworkCase) -> Result<Self> {
        if case.generators.len() != self.particles.len()
            || case.generators.iter().zip(&self.particles).any(|(g, p)| g.bus != p.bus)
        {
            return Err(Error::InvalidInput(
                "case generators do not match the particle set".into(),
            ));
        }
        let particles = self
            .particles
            .iter()
            .zip(particle_masses(case))
            .zip(&case.generators)
            .map(|((p, m), g)| Particle {
                mass: m,
                kind: g.kind(),
                ..p.clone()
            })
            .collect();
        ParticleSet::new(particles, self.padded)
    }
}

/// Embed the generator buses of `case` by classical MDS on the Thevenin
/// distances of the generator-grounded pre-fault network and attach masses.
pub fn build_particles(case: &NetworkCase, dim: usize) -> Result<ParticleSet> {
    let z = thevenin_zbus(case, &[])?;
    build_particles_with(case, &z, dim)
}

pub fn build_particles_with(
    case: &NetworkCase,
    z: &crate::grid_model::ImpedanceMatrix,
    dim: usize,
) -> Result<ParticleSet> {
    let buses = case.generator_buses();
    let d = distance_matrix(z, &buses)?;
    let Embedding { coords, padded, .. } = embed_coordinates(&d, dim)?;
    let labels = case.generator_labels();
    let particles = case
        .generators
        .iter()
        .zip(particle_masses(case))
        .zip(labels)
        .map(|((g, mass), gen)| {
            let k = buses.iter().position(|b| *b == g.bus).expect("generator bus listed");
            Particle {
                gen,
                bus: g.bus,
                kind: g.kind(),
                mass,
                coord: coords[k].clone(),
            }
        })
        .collect();
    ParticleSet::new(particles, padded)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenterOfMass {
    pub r: Vec<f64>,
    pub m_total: f64,
    /// Generator bus closest to `r` (ties to the lowest bus id).
    pub nearest_bus: BusId,
    /// Closest SM bus and its distance from `r`; absent without SMs.
    pub nearest_sm_bus: Option<BusId>,
    pub dist_to_nearest_sm: Option<f64>,
    /// Σ m_i·(r_i − R), which vanishes at the center of mass.
    pub residual: Vec<f64>,
}

impl CenterOfMass {
    pub fn residual_norm(&self) -> f64 {
        self.residual.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

fn nearest<'a>(r: &[f64], candidates: impl Iterator<Item = &'a Particle>) -> Option<(BusId, f64)> {
    let mut best: Option<(BusId, f64)> = None;
    for p in candidates {
        let d = euclid(r, &p.coord);
        best = match best {
            Some((b, bd)) if bd < d || (bd == d && b <= p.bus) => Some((b, bd)),
            _ => Some((p.bus, d)),
        };
    }
    best
}

/// Mass-weighted mean position R = Σ m_i·r_i / M.
pub fn center_of_mass(p: &ParticleSet) -> Result<CenterOfMass> {
    let m_total: f64 = p.particles.iter().map(|q| q.mass).sum();
    if !(m_total > 0.0) {
        return Err(Error::InvalidInput("total mass must be positive".into()));
    }
    let r: Vec<f64> = (0..p.dim)
        .map(|a| p.particles.iter().map(|q| q.mass * q.coord[a]).sum::<f64>() / m_total)
        .collect();
    let residual = (0..p.dim)
        .map(|a| p.particles.iter().map(|q| q.mass * (q.coord[a] - r[a])).sum())
        .collect();
    let (nearest_bus, _) = nearest(&r, p.particles.iter()).expect("particle set is non-empty");
    let sm = nearest(&r, p.particles.iter().filter(|q| q.kind == GenKind::Sm));
    Ok(CenterOfMass {
        nearest_bus,
        nearest_sm_bus: sm.map(|s| s.0),
        dist_to_nearest_sm: sm.map(|s| s.1),
        r,
        m_total,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Displacement {
    /// R_after − R_before
    pub shift: Vec<f64>,
    /// Change in distance from R to the nearest SM; absent if either side has
    /// no SM.
    pub d_dist_to_nearest_sm: Option<f64>,
}

/// How the center of mass moves between two mass assignments on one
/// embedding.
pub fn com_displacement(
    before: (&ParticleSet, &CenterOfMass),
    after: (&ParticleSet, &CenterOfMass),
) -> Result<Displacement> {
    let (pb, cb) = before;
    let (pa, ca) = after;
    let same = pb.dim == pa.dim
        && pb.particles.len() == pa.particles.len()
        && pb
            .particles
            .iter()
            .zip(&pa.particles)
            .all(|(x, y)| x.bus == y.bus && x.coord == y.coord);
    if !same {
        return Err(Error::InvalidInput("particle sets use different embeddings".into()));
    }
    Ok(Displacement {
        shift: ca.r.iter().zip(&cb.r).map(|(a, b)| a - b).collect(),
        d_dist_to_nearest_sm: match (ca.dist_to_nearest_sm, cb.dist_to_nearest_sm) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub n_vsg: usize,
    /// Buses converted so far, in order.
    pub replaced: Vec<BusId>,
    pub r: Vec<f64>,
    pub m_total: f64,
    pub nearest_bus: BusId,
    pub nearest_sm_bus: Option<BusId>,
    pub dist_to_nearest_sm: Option<f64>,
}

/// Convert the SMs at `replacements` to default VSGs one at a time and track
/// the center of mass after each prefix. All points share the embedding of
/// the unmodified case, so only the masses move.
pub fn sweep(case: &NetworkCase, replacements: &[BusId], dim: usize) -> Result<Vec<SweepPoint>> {
    let baseline = build_particles(case, dim)?;
    let mut current = case.clone();
    let mut replaced = Vec::new();
    let mut points = Vec::with_capacity(replacements.len() + 1);
    for step in 0..=replacements.len() {
        if step > 0 {
            let bus = replacements[step - 1];
            let gens: Vec<usize> = (0..current.generators.len())
                .filter(|&k| current.generators[k].bus == bus)
                .collect();
            let loc = format!("replacements[{}]", step - 1);
            match gens.as_slice() {
                [] => return Err(Error::semantic(loc, format!("no generator at bus {bus}"))),
                ks if ks.iter().any(|&k| current.generators[k].kind() != GenKind::Sm) => {
                    return Err(Error::semantic(loc, format!("bus {bus} has no SM left to replace")))
                }
                ks => {
                    for &k in ks {
                        let g = &mut current.generators[k];
                        g.model = crate::grid_model::GenModel::default_for(GenKind::Vsg);
                    }
                }
            }
            replaced.push(bus);
        }
        let particles = baseline.with_masses_from(&current)?;
        let com = center_of_mass(&particles)?;
        points.push(SweepPoint {
            n_vsg: current.generators.iter().filter(|g| g.kind() == GenKind::Vsg).count(),
            replaced: replaced.clone(),
            r: com.r,
            m_total: com.m_total,
            nearest_bus: com.nearest_bus,
            nearest_sm_bus: com.nearest_sm_bus,
            dist_to_nearest_sm: com.dist_to_nearest_sm,
        });
    }
    Ok(points)
}
