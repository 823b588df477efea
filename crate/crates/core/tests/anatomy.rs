mod common;

use atomgrid::anatomy::*;
use atomgrid::dynamics::{simulate, Event, EventSchedule, SettleRule, SimOptions};
use atomgrid::grid_model::{apply_overlay, builtin_overlay, BusId, GenKind, GenModel};
use atomgrid::{builtin_case, solve_powerflow, Complex64, NetworkCase, PowerFlowOptions};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn with_overlay(case: &str, overlay: &str) -> NetworkCase {
    apply_overlay(&builtin_case(case).unwrap(), &builtin_overlay(overlay).unwrap()).unwrap()
}

fn particle(bus: u32, kind: GenKind, mass: f64, coord: Vec<f64>) -> Particle {
    Particle {
        gen: bus.to_string(),
        bus: BusId(bus),
        kind,
        mass,
        coord,
    }
}

fn random_set(rng: &mut ChaCha8Rng) -> ParticleSet {
    let n = rng.random_range(1..12);
    let dim = rng.random_range(1..=3);
    let scale = 10f64.powf(rng.random_range(-3.0..3.0));
    let particles = (0..n)
        .map(|i| {
            let coord = (0..dim).map(|_| rng.random_range(-1.0..1.0) * scale).collect();
            let mass = if i == 0 {
                rng.random_range(0.1..1e6)
            } else {
                rng.random_range(0.0..1e6)
            };
            particle(i as u32 + 1, GenKind::Sm, mass, coord)
        })
        .collect();
    ParticleSet::new(particles, false).unwrap()
}

#[test]
fn center_of_mass_identity_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let p = random_set(&mut rng);
        let c = center_of_mass(&p).unwrap();
        let max_r = p
            .particles
            .iter()
            .map(|q| q.coord.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        assert!(c.residual_norm() <= 1e-12 * c.m_total * max_r);
    }
}

#[test]
fn center_of_mass_examples() {
    let single = ParticleSet::new(vec![particle(4, GenKind::Sm, 2.0, vec![0.3, -0.2])], false).unwrap();
    assert_eq!(center_of_mass(&single).unwrap().r, vec![0.3, -0.2]);

    let pair = ParticleSet::new(
        vec![
            particle(1, GenKind::Sm, 3.0, vec![0.0]),
            particle(2, GenKind::Sm, 1.0, vec![4.0]),
        ],
        false,
    )
    .unwrap();
    let c = center_of_mass(&pair).unwrap();
    assert_eq!(c.r, vec![1.0]);
    assert_eq!(c.nearest_bus, BusId(1));

    let zero = vec![particle(1, GenKind::Sm, 0.0, vec![0.0])];
    assert!(ParticleSet::new(zero, false).is_err());
}

#[test]
fn nearest_bus_ties_go_to_lowest_id() {
    let p = ParticleSet::new(
        vec![
            particle(7, GenKind::Sm, 1.0, vec![1.0]),
            particle(3, GenKind::Sm, 1.0, vec![-1.0]),
        ],
        false,
    )
    .unwrap();
    let c = center_of_mass(&p).unwrap();
    assert_eq!(c.nearest_bus, BusId(3));
    assert_eq!(c.nearest_sm_bus, Some(BusId(3)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn com_translates_and_ignores_mass_scale(
        pts in prop::collection::vec((0.01f64..100.0, -5.0f64..5.0, -5.0f64..5.0), 1..8),
        v in (-3.0f64..3.0, -3.0f64..3.0),
        k in 0.001f64..1000.0,
    ) {
        let make = |shift: (f64, f64), scale: f64| {
            let ps = pts.iter().enumerate()
                .map(|(i, &(m, x, y))| particle(i as u32 + 1, GenKind::Sm, m * scale, vec![x + shift.0, y + shift.1]))
                .collect();
            center_of_mass(&ParticleSet::new(ps, false).unwrap()).unwrap()
        };
        let base = make((0.0, 0.0), 1.0);
        let moved = make(v, 1.0);
        let heavy = make((0.0, 0.0), k);
        prop_assert!((moved.r[0] - base.r[0] - v.0).abs() < 1e-12 * (1.0 + base.r[0].abs() + v.0.abs()) * 8.0);
        prop_assert!((moved.r[1] - base.r[1] - v.1).abs() < 1e-12 * (1.0 + base.r[1].abs() + v.1.abs()) * 8.0);
        prop_assert!((heavy.r[0] - base.r[0]).abs() < 1e-12 * 8.0 * (1.0 + base.r[0].abs()));
        prop_assert!((heavy.r[1] - base.r[1]).abs() < 1e-12 * 8.0 * (1.0 + base.r[1].abs()));
        prop_assert_eq!(heavy.nearest_bus, base.nearest_bus);
    }

    #[test]
    fn mds_preserves_embeddable_distances(
        pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..9),
    ) {
        let n = pts.len();
        let d = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt()
        });
        let e = embed_coordinates(&d, 2).unwrap();
        for i in 0..n {
            for j in 0..n {
                let got: f64 = e.coords[i].iter().zip(&e.coords[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                prop_assert!((got - d[(i, j)]).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn mds_is_deterministic() {
    let case = builtin_case("ieee39").unwrap();
    let a = build_particles(&case, 2).unwrap();
    let b = build_particles(&case, 2).unwrap();
    assert_eq!(a, b);
    for axis in 0..2 {
        let first = a
            .particles
            .iter()
            .map(|p| p.coord[axis])
            .find(|x| x.abs() > 1e-12)
            .unwrap();
        assert!(first > 0.0);
    }
}

#[test]
fn masses_and_disparity() {
    let case = builtin_case("ieee9").unwrap();
    let mut equal = case.clone();
    for g in equal.generators.iter_mut() {
        g.s_rated = 100.0;
        g.model = GenModel::default_for(GenKind::Sm);
    }
    let m = particle_masses(&equal);
    assert!(m.iter().all(|x| *x == m[0]));

    for overlay in ["ieee9-case1", "ieee9-case4", "ieee9-case5"] {
        let c = with_overlay("ieee9", overlay);
        let m = particle_masses(&c);
        let sm = c
            .generators
            .iter()
            .zip(&m)
            .filter(|(g, _)| g.kind() == GenKind::Sm)
            .map(|(_, m)| *m)
            .fold(f64::INFINITY, f64::min);
        let vsg = c
            .generators
            .iter()
            .zip(&m)
            .filter(|(g, _)| g.kind() == GenKind::Vsg)
            .map(|(_, m)| *m)
            .fold(0.0, f64::max);
        assert!(sm / vsg >= 100.0, "{overlay}: {}", sm / vsg);
    }
}

#[test]
fn displacement_examples() {
    // No mass change, no shift.
    let case = with_overlay("ieee9", "ieee9-case1");
    let p = build_particles(&case, 2).unwrap();
    let c = center_of_mass(&p).unwrap();
    let d = com_displacement((&p, &c), (&p, &c)).unwrap();
    assert!(d.shift.iter().all(|x| *x == 0.0));
    assert_eq!(d.d_dist_to_nearest_sm, Some(0.0));

    // SM 3 becomes a VSG: the center of mass closes in on the remaining SM.
    let mut replaced = case.clone();
    let k = replaced.generators.iter().position(|g| g.bus == BusId(3)).unwrap();
    replaced.generators[k].model = GenModel::default_for(GenKind::Vsg);
    let p2 = p.with_masses_from(&replaced).unwrap();
    let c2 = center_of_mass(&p2).unwrap();
    let d = com_displacement((&p, &c), (&p2, &c2)).unwrap();
    assert!(d.d_dist_to_nearest_sm.unwrap() < 0.0);
    assert_eq!(c2.nearest_sm_bus, Some(BusId(1)));

    // Different embeddings are refused.
    let other = build_particles(&case, 1).unwrap();
    let oc = center_of_mass(&other).unwrap();
    assert!(com_displacement((&p, &c), (&other, &oc)).is_err());
}

#[test]
fn massless_vsg_leaves_center_on_remaining_sm() {
    let p = ParticleSet::new(
        vec![
            particle(1, GenKind::Sm, 5.0, vec![-0.5]),
            particle(2, GenKind::Sm, 5.0, vec![0.5]),
        ],
        false,
    )
    .unwrap();
    let c = center_of_mass(&p).unwrap();
    assert_eq!(c.r, vec![0.0]);
    let mut q = p.clone();
    q.particles[1].kind = GenKind::Vsg;
    q.particles[1].mass = 0.0;
    let c2 = center_of_mass(&q).unwrap();
    assert_eq!(c2.r, vec![-0.5]);
    assert_eq!(c2.dist_to_nearest_sm, Some(0.0));
}

#[test]
fn sweep_series() {
    for case in [builtin_case("ieee9").unwrap(), with_overlay("ieee9", "ieee9-case1")] {
        let pts = sweep(&case, &[BusId(3)], 2).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(pts[1].m_total < pts[0].m_total);
        assert!(pts[1].dist_to_nearest_sm.unwrap() < pts[0].dist_to_nearest_sm.unwrap());
        assert_eq!(pts[1].n_vsg, pts[0].n_vsg + 1);
    }
    let base = builtin_case("ieee9").unwrap();
    assert_eq!(sweep(&base, &[], 2).unwrap().len(), 1);
    let two = sweep(&base, &[BusId(3), BusId(2)], 2).unwrap();
    assert!(two[2].m_total < two[1].m_total);
    assert!(sweep(&base, &[BusId(5)], 2).is_err());
    assert!(sweep(&base, &[BusId(3), BusId(3)], 2).is_err());
}

#[test]
fn simulated_orbit_reports() {
    let case = with_overlay("ieee9", "ieee9-case1");
    let pf = solve_powerflow(&case, &PowerFlowOptions::default()).unwrap();
    let sched = EventSchedule::fault(BusId(8), 1.0, 1.1).unwrap();
    let traj = simulate(&case, &pf, &sched, &SimOptions::default()).unwrap();
    let report = analyze(&case, &sched, &traj, &AnalysisOptions::default()).unwrap();
    let OrbitOutcome::Settled(orbit) = &report.orbit_report else {
        panic!("case I settles");
    };
    let mut nucleus: Vec<BusId> = orbit.nucleus.iter().map(|r| r.bus).collect();
    nucleus.sort();
    assert_eq!(nucleus, vec![BusId(1), BusId(3)]);
    assert_eq!(orbit.orbitals[0].bus, BusId(2));
    // The classical model returns to the pre-fault operating point.
    assert!((orbit.orbitals[0].v - 1.006).abs() < 1e-5);
    assert_eq!(orbit.quantum_numbers, vec![11]);
    assert_eq!(report.activation.len(), 3);

    // Only q_unit differs: same geometry, different counts.
    let coarse = analyze(
        &case,
        &sched,
        &traj,
        &AnalysisOptions {
            q_unit: 0.002,
            ..AnalysisOptions::default()
        },
    )
    .unwrap();
    assert_eq!(coarse.com, report.com);
    let OrbitOutcome::Settled(o2) = &coarse.orbit_report else {
        panic!()
    };
    assert_eq!(o2.quantum_numbers, vec![6]);

    // All-SM system: empty orbitals.
    let sm = builtin_case("ieee9").unwrap();
    let pf = solve_powerflow(&sm, &PowerFlowOptions::default()).unwrap();
    let traj = simulate(&sm, &pf, &sched, &SimOptions::default()).unwrap();
    let r = analyze(&sm, &sched, &traj, &AnalysisOptions::default()).unwrap();
    let OrbitOutcome::Settled(o) = &r.orbit_report else {
        panic!()
    };
    assert!(o.orbitals.is_empty() && o.gaps.is_empty());
    assert_eq!(o.nucleus.len(), 3);
}

#[test]
fn unsettled_run_reports_no_numbers() {
    let case = with_overlay("ieee9", "ieee9-case1");
    let pf = solve_powerflow(&case, &PowerFlowOptions::default()).unwrap();
    let sched = EventSchedule::fault(BusId(8), 1.0, 1.1).unwrap();
    let short = SimOptions {
        duration: 1.5,
        ..SimOptions::default()
    };
    let traj = simulate(&case, &pf, &sched, &short).unwrap();
    let r = analyze(&case, &sched, &traj, &AnalysisOptions::default()).unwrap();
    assert!(matches!(r.orbit_report, OrbitOutcome::NotSettled { .. }));
    assert!(r.activation.is_empty());
    assert!(!r.warnings.is_empty());
}

#[test]
fn activation_at_rest_is_zero() {
    let case = builtin_case("ieee9").unwrap();
    let pf = solve_powerflow(&case, &PowerFlowOptions::default()).unwrap();
    let sched = EventSchedule::fault(BusId(8), 1.0, 1.1).unwrap();
    let traj = simulate(&case, &pf, &sched, &SimOptions::default()).unwrap();
    let rule = SettleRule::default();
    let same = activation_energy(&traj, "1", 10.0, 10.0, &rule).unwrap();
    assert_eq!(same.delta_e, 0.0);
    assert_eq!(same.delta_e, same.e_after - same.e_before);
    // Damping pulls every SM back to synchronous speed: kinetic energy is
    // restored even though the rotor angles moved.
    for g in &traj.gen_labels {
        let r = activation_energy(&traj, g, 0.999, 10.0, &rule).unwrap();
        assert!(r.delta_e.abs() < 1e-6 * r.e_before, "{g}: {}", r.delta_e);
    }
    let k0 = &traj.samples[999].state.delta;
    let k1 = &traj.samples[10_000].state.delta;
    assert!((k1[0] - k0[0]).abs() > 1e-3);
    assert!(activation_energy(&traj, "1", 1.5, 10.0, &rule).is_err());
    assert!(activation_energy(&traj, "9", 0.5, 10.0, &rule).is_err());
}

#[test]
fn activation_matches_fault_dissipation() {
    // Identical machines either side of the fault never swing against each
    // other, so both settle at a common lower speed once it clears; the
    // kinetic energy they lose is what the fault conductance absorbed.
    let case = common::symmetric_pair(3.0, 0.1);
    let pf = solve_powerflow(&case, &PowerFlowOptions::default()).unwrap();
    let g_f = 2.0;
    let sched = EventSchedule::new(vec![
        Event {
            t: 1.0,
            action: atomgrid::dynamics::Action::ApplyFault {
                bus: BusId(2),
                admittance: Complex64::new(g_f, 0.0),
            },
        },
        Event::clear_fault(1.1),
    ])
    .unwrap();
    let opts = SimOptions {
        duration: 3.0,
        ..SimOptions::default()
    };
    let traj = simulate(&case, &pf, &sched, &opts).unwrap();
    let bus2 = traj.bus_position(BusId(2)).unwrap();
    let dissipated: f64 = traj
        .samples
        .iter()
        .filter(|s| s.state.network_mode == atomgrid::dynamics::NetworkMode::Fault)
        .map(|s| g_f * s.v_bus[bus2].powi(2) * traj.dt * case.base_mva * 1e6)
        .sum();
    assert!(dissipated > 0.0);
    let rule = SettleRule::default();
    let total: f64 = traj
        .gen_labels
        .iter()
        .map(|g| activation_energy(&traj, g, 0.9, 3.0, &rule).unwrap().delta_e)
        .sum();
    let rel = (total + dissipated).abs() / dissipated;
    assert!(rel < 0.01, "ΔE {total:e} J vs dissipated {dissipated:e} J");
    let after = activation_energy(&traj, "1", 0.9, 3.0, &rule).unwrap();
    assert!(after.freq_dev < 0.0);
}
