//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::PI;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use atomgrid::anatomy::{
    analyze, center_of_mass, electrical_distance, particle_masses, AnalysisOptions, OrbitOutcome, OrbitReport,
    Particle, ParticleSet,
};
use atomgrid::dynamics::{
    electrical_power, init_dynamic_state, step_rk4, swing_rhs, DynamicState, DynamicSystem, MachineDynParams,
    NetworkMode, SimOptions,
};
use atomgrid::grid_model::{
    apply_overlay, build_admittance, builtin_overlay, generator_grounding, zbus, AdmittanceMatrix, BusId, GenKind,
    GenModel, Node, SmParams, VsgParams,
};
use atomgrid::{builtin_case, simulate, solve_powerflow, EventSchedule, NetworkCase, PowerFlowOptions};
use common::{gauss_seidel, two_machine_case};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_s: f64, detail: String) -> Outcome {
    check(
        elapsed.as_secs_f64() < limit_s,
        format!("{detail}; runtime {:.3} s (limit {limit_s} s)", elapsed.as_secs_f64()),
    )
}

fn with_overlay(case: &str, overlay: &str) -> NetworkCase {
    apply_overlay(&builtin_case(case).unwrap(), &builtin_overlay(overlay).unwrap()).unwrap()
}

fn init(case: &NetworkCase) -> DynamicSystem {
    let pf = solve_powerflow(case, &PowerFlowOptions::default()).unwrap();
    init_dynamic_state(case, &pf).unwrap()
}

fn powerflow_oracle() -> Outcome {
    let start = Instant::now();
    let case = builtin_case("ieee9").unwrap();
    let sol = solve_powerflow(&case, &PowerFlowOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let gs = gauss_seidel(&case, 1e-12, 200_000);
    let worst = sol.v.iter().zip(&gs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let detail = format!(
        "max |V_newton − V_gs| = {worst:.2e} p.u., {} iterations, mismatch {:.2e}",
        sol.iterations, sol.max_mismatch
    );
    check(
        worst <= 1e-6 && sol.iterations <= 10 && sol.max_mismatch < 1e-8,
        detail.clone(),
    )?;
    within(elapsed, 1.0, detail)
}

fn com_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=40);
        let dim = rng.random_range(1..=4);
        let scale = 10f64.powf(rng.random_range(-3.0..3.0));
        let particles: Vec<Particle> = (0..n)
            .map(|k| Particle {
                gen: k.to_string(),
                bus: BusId(k as u32 + 1),
                kind: GenKind::Sm,
                mass: 10f64.powf(rng.random_range(-2.0..6.0)),
                coord: (0..dim).map(|_| scale * rng.random_range(-1.0..1.0)).collect(),
            })
            .collect();
        let set = ParticleSet::new(particles, false).map_err(|e| e.to_string())?;
        let com = center_of_mass(&set).map_err(|e| e.to_string())?;
        let r_max = set
            .particles
            .iter()
            .map(|p| p.coord.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        if r_max > 0.0 {
            worst = worst.max(com.residual_norm() / (com.m_total * r_max));
        }
    }
    check(
        worst <= 1e-12,
        format!("max normalized residual {worst:.2e} over 1000 sets"),
    )
}

fn swing_mechanics() -> Outcome {
    let omega_s = 2.0 * PI * 60.0;
    let m = MachineDynParams {
        h_eff: 5.0,
        d: 0.0,
        e_internal: 1.0,
        xd_prime: 0.2,
        s_rated: 100.0,
        base_mva: 100.0,
        omega_s,
        p_m: 0.1,
    };
    let rest = DynamicState {
        t: 0.0,
        delta: vec![0.0],
        omega_dev: vec![0.0],
        network_mode: NetworkMode::Prefault,
    };
    let (_, dw) = swing_rhs(&rest, &[m], &[0.0]);
    let direct = omega_s * 0.1 / (2.0 * 5.0);
    let rel = (dw[0] - direct).abs() / direct;
    let (_, dw2) = swing_rhs(&rest, &[MachineDynParams { h_eff: 10.0, ..m }], &[0.0]);
    check(
        rel <= 1e-10 && (dw[0] - 3.7699).abs() < 5e-5 && dw2[0] * 2.0 == dw[0],
        format!(
            "dω/dt = {:.6} rad/s² (relative error {rel:.1e}); 2H gives {:.6}",
            dw[0], dw2[0]
        ),
    )
}

fn omib_final(dt: f64, horizon: f64) -> DynamicState {
    // Machine 1 is so heavy it acts as the infinite bus.
    let case = two_machine_case(1e6, 1.0, 0.0, 0.05, 100.0);
    let sys = init(&case);
    let mut s = sys.state.clone();
    s.omega_dev[1] = 8.0;
    for _ in 0..(horizon / dt).round() as usize {
        s = step_rk4(&s, &sys.machines, &sys.prefault, dt).unwrap();
    }
    s
}

fn integrator_quality() -> Outcome {
    let start = Instant::now();
    let horizon = 0.2;
    let reference = omib_final(0.5e-3 / 8.0, horizon);
    let pts: Vec<(f64, f64)> = [4e-3, 2e-3, 1e-3, 0.5e-3]
        .iter()
        .map(|&dt| {
            let s = omib_final(dt, horizon);
            let err = (s.delta[1] - reference.delta[1])
                .abs()
                .max((s.omega_dev[1] - reference.omega_dev[1]).abs() / 60.0);
            (dt.ln(), err.ln())
        })
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / n,
        pts.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let slope =
        pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();

    // Lossless, undamped two-machine system: kinetic energy plus the work
    // integral of (Pe − Pm) must stay constant.
    let case = two_machine_case(4.0, 2.5, 0.0, 0.1, 80.0);
    let sys = init(&case);
    let ws = case.omega_s();
    let e = sys.e_internal();
    let kinetic = |s: &DynamicState| -> f64 {
        s.omega_dev
            .iter()
            .zip(&sys.machines)
            .map(|(w, m)| m.h_system() * w * w / ws)
            .sum()
    };
    let mut s = sys.state.clone();
    s.omega_dev.copy_from_slice(&[2.0, -3.0]);
    let e0 = kinetic(&s);
    let mut potential = 0.0;
    let mut pe = electrical_power(&s.delta, &e, &sys.prefault.y_red);
    let mut drift: f64 = 0.0;
    for _ in 0..10_000 {
        let next = step_rk4(&s, &sys.machines, &sys.prefault, 1e-3).map_err(|e| e.to_string())?;
        let pe_next = electrical_power(&next.delta, &e, &sys.prefault.y_red);
        for k in 0..2 {
            potential += 0.5 * (pe[k] + pe_next[k] - 2.0 * sys.machines[k].p_m) * (next.delta[k] - s.delta[k]);
        }
        s = next;
        pe = pe_next;
        drift = drift.max((kinetic(&s) + potential - e0).abs() / e0);
    }
    let detail = format!(
        "convergence slope {slope:.3}; energy drift {:.2e} % over 10 s",
        drift * 100.0
    );
    check((3.7..=4.3).contains(&slope) && drift < 1e-3, detail.clone())?;
    within(start.elapsed(), 10.0, detail)
}

fn settled_orbit(case: &NetworkCase, fault_bus: u32) -> Result<(OrbitReport, bool), String> {
    let pf = solve_powerflow(case, &PowerFlowOptions::default()).map_err(|e| e.to_string())?;
    let sched = EventSchedule::fault(BusId(fault_bus), 1.0, 1.1).map_err(|e| e.to_string())?;
    let traj = simulate(case, &pf, &sched, &SimOptions::default()).map_err(|e| e.to_string())?;
    let report = analyze(case, &sched, &traj, &AnalysisOptions::default()).map_err(|e| e.to_string())?;
    match report.orbit_report {
        OrbitOutcome::Settled(r) => Ok((r, report.loss_of_synchronism.is_none())),
        OrbitOutcome::NotSettled { quantity, .. } => Err(format!("not settled ({quantity})")),
    }
}

fn cluster_check(overlay: &str) -> Outcome {
    let start = Instant::now();
    let (r, in_sync) = settled_orbit(&with_overlay("ieee9", overlay), 8)?;
    let elapsed = start.elapsed();
    let gaps: Vec<String> = r
        .gaps
        .iter()
        .map(|g| format!("bus {} ΔV {:+.6}", g.bus, g.delta_v))
        .collect();
    let detail = format!("{overlay}: SM spread {:.6}, {}", r.sm_spread, gaps.join(", "));
    let ok = in_sync && !r.gaps.is_empty() && r.sm_spread <= 0.005 && r.gaps.iter().all(|g| g.delta_v.abs() > 0.005);
    check(ok, detail.clone())?;
    within(elapsed, 30.0, detail)
}

fn ieee9_voltage_clusters() -> Outcome {
    let two = cluster_check("ieee9-case2")?;
    let four = cluster_check("ieee9-case4")?;
    Ok(format!("{two} | {four}"))
}

fn atomgrid(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_atomgrid"))
        .args(args)
        .env("ATOMGRID_NO_COLOR", "1")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn sweep_displacement() -> Outcome {
    let out = atomgrid(&["sweep", "--case", "ieee9", "--replace", "3"])?;
    let doc: serde_json::Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let pts = doc["points"].as_array().ok_or("no points")?;
    let get = |k: usize, f: &str| pts[k][f].as_f64().unwrap_or(f64::NAN);
    let (m0, m1) = (get(0, "m_total"), get(1, "m_total"));
    let (d0, d1) = (get(0, "dist_to_nearest_sm"), get(1, "dist_to_nearest_sm"));
    check(
        pts.len() == 2 && m1 < m0 && d1 < d0,
        format!("M {m0:.1} → {m1:.1} kg·m², distance to nearest SM {d0:.6} → {d1:.6} p.u."),
    )
}

fn mass_disparity() -> Outcome {
    let mut case = builtin_case("ieee9").unwrap();
    for g in &mut case.generators {
        g.s_rated = 100.0;
    }
    case.generators[0].model = GenModel::Sm(SmParams::default());
    case.generators[1].model = GenModel::Vsg(VsgParams::default());
    let m = particle_masses(&case);
    let ratio = m[0] / m[1];
    check(ratio >= 100.0, format!("default SM/VSG mass ratio {ratio:.3}"))
}

fn thevenin_oracle() -> Outcome {
    // Bus 1 grounded through j0.5, line j0.1 to bus 2.
    let y = nalgebra_2x2([-12.0, 10.0, 10.0, -10.0]);
    let z = zbus(&AdmittanceMatrix {
        nodes: vec![Node::Bus(BusId(1)), Node::Bus(BusId(2))],
        y,
    })
    .map_err(|e| e.to_string())?;
    let d = electrical_distance(&z, BusId(1), BusId(2)).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for name in ["ieee9", "ieee39"] {
        let case = builtin_case(name).unwrap();
        let y = build_admittance(&case, &generator_grounding(&case));
        let z = zbus(&y).map_err(|e| e.to_string())?;
        let prod = &y.y * &z.z;
        for i in 0..prod.nrows() {
            for j in 0..prod.ncols() {
                let id = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - Complex64::new(id, 0.0)).norm());
            }
        }
    }
    check(
        (d - 0.1).abs() <= 1e-9 && worst <= 1e-9,
        format!("2-bus distance {d:.12} p.u.; max |Y·Z − I| {worst:.2e}"),
    )
}

fn nalgebra_2x2(b: [f64; 4]) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &b.map(|x| Complex64::new(0.0, x)))
}

fn ieee39_end_to_end() -> Outcome {
    let start = Instant::now();
    let case = with_overlay("ieee39", "ieee39-vsg");
    let mut vsg: Vec<u32> = case
        .generators
        .iter()
        .filter(|g| g.kind() == GenKind::Vsg)
        .map(|g| g.bus.0)
        .collect();
    vsg.sort();
    if vsg != [32, 33, 34] {
        return Err(format!("overlay VSG buses {vsg:?}"));
    }
    let (r, in_sync) = settled_orbit(&case, 16)?;
    let detail = format!(
        "in synchronism: {in_sync}; settled, SM spread {:.6}, n = {:?}",
        r.sm_spread, r.quantum_numbers
    );
    check(in_sync, detail.clone())?;
    within(start.elapsed(), 120.0, detail)
}

fn dir_bytes(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    for e in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let e = e.map_err(|e| e.to_string())?;
        files.push((
            e.file_name().to_string_lossy().into_owned(),
            fs::read(e.path()).map_err(|e| e.to_string())?,
        ));
    }
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: [&[&str]; 4] = [
        &[
            "simulate",
            "--case",
            "ieee9",
            "--overlay",
            "ieee9-case2",
            "--fault-bus",
            "8",
        ],
        &[
            "analyze",
            "--case",
            "ieee9",
            "--overlay",
            "ieee9-case2",
            "--fault-bus",
            "8",
        ],
        &["powerflow", "--case", "ieee39"],
        &["sweep", "--case", "ieee9", "--replace", "3,2"],
    ];
    let mut bytes = 0;
    for (k, args) in runs.iter().enumerate() {
        let mut seen = Vec::new();
        for rep in 0..2 {
            let dir = tmp.path().join(format!("{k}-{rep}"));
            let mut full = args.to_vec();
            let d = dir.to_str().unwrap().to_string();
            full.extend(["--out", d.as_str()]);
            let stdout = atomgrid(&full)?;
            let files = dir_bytes(&dir)?;
            bytes += files.iter().map(|f| f.1.len()).sum::<usize>();
            seen.push((stdout, files));
        }
        if seen[0] != seen[1] {
            return Err(format!("`{}` differs between runs", args.join(" ")));
        }
    }
    Ok(format!("4 commands × 2 runs byte-identical ({bytes} bytes compared)"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("power flow matches Gauss-Seidel oracle", powerflow_oracle),
        ("center-of-mass identity", com_identity),
        ("swing equation mechanics", swing_mechanics),
        ("RK4 order and energy conservation", integrator_quality),
        ("ieee9 Case II and Case IV voltage clusters", ieee9_voltage_clusters),
        ("SM→VSG sweep displaces COM toward SMs", sweep_displacement),
        ("SM/VSG mass disparity", mass_disparity),
        ("Z-bus and Thevenin distance oracle", thevenin_oracle),
        ("ieee39 with three VSGs survives bus-16 fault", ieee39_end_to_end),
        ("byte-identical repeated CLI runs", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2}: {tag}  {name}: {detail} [{secs:.2} s]", k + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
