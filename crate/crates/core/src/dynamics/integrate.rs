use num_complex::Complex64;

use super::events::{EventSchedule, NetworkConfig, NetworkMode};
use super::machine::{electrical_power_into, swing_rhs_into, vsg_equivalent_inertia, MachineDynParams};
use super::network::{NetworkModel, ReducedNetwork};
use super::trajectory::{LossOfSynchronism, Sample, Trajectory};
use super::DynamicState;
use crate::error::{Error, Result};
use crate::grid_model::{BusId, GenModel, NetworkCase};
use crate::powerflow::{mismatch, PowerFlowSolution};

/// Machines initialized from a converged power flow, ready to integrate.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicSystem {
    pub state: DynamicState,
    pub machines: Vec<MachineDynParams>,
    pub gen_labels: Vec<String>,
    pub gen_buses: Vec<BusId>,
    pub gen_models: Vec<GenModel>,
    pub network: NetworkModel,
    pub prefault: ReducedNetwork,
}

impl DynamicSystem {
    pub fn e_internal(&self) -> Vec<f64> {
        self.machines.iter().map(|m| m.e_internal).collect()
    }

    /// Reduced network for every configuration of `schedule`, pre-fault first.
    pub fn networks(&self, schedule: &EventSchedule) -> Result<Vec<ReducedNetwork>> {
        schedule
            .configs()
            .iter()
            .map(|c| {
                if *c == self.prefault.config {
                    Ok(self.prefault.clone())
                } else {
                    self.network.reduce(c)
                }
            })
            .collect()
    }
}

/// Build the EMF behind each transient reactance from the terminal
/// conditions of `pf` and set every mechanical power to the initial
/// electrical power, so the pre-fault network is an exact equilibrium.
pub fn init_dynamic_state(case: &NetworkCase, pf: &PowerFlowSolution) -> Result<DynamicSystem> {
    let network = NetworkModel::new(case, pf)?;
    let worst = mismatch(case, &pf.v)?
        .iter()
        .map(|(p, q)| p.abs().max(q.abs()))
        .fold(0.0, f64::max);
    if !(worst < 1e-6) {
        return Err(Error::InvalidInput(format!(
            "power-flow solution does not satisfy this case (mismatch {worst:.3e} p.u.)"
        )));
    }

    let index = case.bus_index();
    let omega_s = case.omega_s();
    let mut machines = Vec::with_capacity(case.generators.len());
    let mut delta = Vec::with_capacity(case.generators.len());
    for (k, g) in case.generators.iter().enumerate() {
        let v = pf.v[index[&g.bus]];
        let s = Complex64::new(pf.p_gen[k], pf.q_gen[k]) / case.base_mva;
        let current = (s / v).conj();
        let x = g.model.xd_prime() * case.base_mva / g.s_rated;
        let emf = v + Complex64::new(0.0, x) * current;
        let h_eff = match &g.model {
            GenModel::Sm(p) => p.h,
            GenModel::Vsg(p) => vsg_equivalent_inertia(p.c_dc, p.v_dc, g.s_rated, omega_s),
        };
        machines.push(MachineDynParams {
            h_eff,
            d: g.model.damping(),
            e_internal: emf.norm(),
            xd_prime: g.model.xd_prime(),
            s_rated: g.s_rated,
            base_mva: case.base_mva,
            omega_s,
            p_m: 0.0,
        });
        delta.push(emf.arg());
    }

    let prefault = network.reduce(&NetworkConfig::default())?;
    let e: Vec<f64> = machines.iter().map(|m| m.e_internal).collect();
    let mut pe = vec![0.0; machines.len()];
    electrical_power_into(&delta, &e, &prefault.g, &prefault.b, &mut pe);
    for (m, p) in machines.iter_mut().zip(pe) {
        m.p_m = p;
    }

    Ok(DynamicSystem {
        state: DynamicState {
            t: 0.0,
            omega_dev: vec![0.0; delta.len()],
            delta,
            network_mode: NetworkMode::Prefault,
        },
        machines,
        gen_labels: case.generator_labels(),
        gen_buses: case.generators.iter().map(|g| g.bus).collect(),
        gen_models: case.generators.iter().map(|g| g.model).collect(),
        network,
        prefault,
    })
}

struct Workspace {
    pe: Vec<f64>,
    kd: [Vec<f64>; 4],
    kw: [Vec<f64>; 4],
    d_tmp: Vec<f64>,
    w_tmp: Vec<f64>,
}

impl Workspace {
    fn new(m: usize) -> Self {
        let z = || vec![0.0; m];
        Workspace {
            pe: z(),
            kd: [z(), z(), z(), z()],
            kw: [z(), z(), z(), z()],
            d_tmp: z(),
            w_tmp: z(),
        }
    }
}

fn rk4_in_place(
    delta: &mut [f64],
    omega: &mut [f64],
    params: &[MachineDynParams],
    e: &[f64],
    net: &ReducedNetwork,
    h: f64,
    ws: &mut Workspace,
) {
    let m = delta.len();
    let Workspace {
        pe,
        kd,
        kw,
        d_tmp,
        w_tmp,
    } = ws;
    for stage in 0..4 {
        let c = match stage {
            0 => 0.0,
            1 | 2 => 0.5 * h,
            _ => h,
        };
        if stage == 0 {
            d_tmp.copy_from_slice(delta);
            w_tmp.copy_from_slice(omega);
        } else {
            for i in 0..m {
                d_tmp[i] = delta[i] + c * kd[stage - 1][i];
                w_tmp[i] = omega[i] + c * kw[stage - 1][i];
            }
        }
        electrical_power_into(d_tmp, e, &net.g, &net.b, pe);
        let (kd_s, kw_s) = (&mut kd[stage], &mut kw[stage]);
        swing_rhs_into(w_tmp, params, pe, kd_s, kw_s);
    }
    for i in 0..m {
        delta[i] += h / 6.0 * (kd[0][i] + 2.0 * kd[1][i] + 2.0 * kd[2][i] + kd[3][i]);
        omega[i] += h / 6.0 * (kw[0][i] + 2.0 * kw[1][i] + 2.0 * kw[2][i] + kw[3][i]);
    }
}

/// One classical Runge-Kutta step of the swing equations with the electrical
/// power re-evaluated at every stage. A negative `dt` integrates backwards.
pub fn step_rk4(
    state: &DynamicState,
    params: &[MachineDynParams],
    net: &ReducedNetwork,
    dt: f64,
) -> Result<DynamicState> {
    if !dt.is_finite() || dt == 0.0 {
        return Err(Error::InvalidInput(format!(
            "step size {dt} must be finite and nonzero"
        )));
    }
    let m = params.len();
    if state.delta.len() != m || state.omega_dev.len() != m || net.y_red.order() != m {
        return Err(Error::InvalidInput(
            "state, parameters and network disagree on machine count".into(),
        ));
    }
    let e: Vec<f64> = params.iter().map(|p| p.e_internal).collect();
    let mut next = state.clone();
    rk4_in_place(
        &mut next.delta,
        &mut next.omega_dev,
        params,
        &e,
        net,
        dt,
        &mut Workspace::new(m),
    );
    next.t = state.t + dt;
    if !next.is_finite() {
        return Err(non_finite(&next));
    }
    Ok(next)
}

fn non_finite(state: &DynamicState) -> Error {
    let k = state
        .delta
        .iter()
        .zip(&state.omega_dev)
        .position(|(d, w)| !d.is_finite() || !w.is_finite())
        .unwrap_or(0);
    Error::NonFinite {
        t: state.t,
        detail: format!("machine {k} angle/speed not finite; try a smaller dt"),
    }
}

/// How many RK4 steps to take per output sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substeps {
    /// Enough that the fastest machine mode stays well inside RK4's
    /// accurate region. Low-inertia VSGs need this.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// s
    pub duration: f64,
    /// Output sample interval, s.
    pub dt: f64,
    pub substeps: Substeps,
    /// Loss-of-synchronism threshold on |δ_i − δ_COI|, rad.
    pub los_limit: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            duration: super::DEFAULT_DURATION,
            dt: super::DEFAULT_DT,
            substeps: Substeps::Auto,
            los_limit: std::f64::consts::PI,
        }
    }
}

// Largest |λ|·h kept per RK4 step.
const STEP_STABILITY: f64 = 1.0;

fn auto_substeps(machines: &[MachineDynParams], e: &[f64], nets: &[ReducedNetwork], dt: f64) -> usize {
    let mut lambda: f64 = 0.0;
    for net in nets {
        for (m, k) in machines.iter().zip(net.stiffness(e)) {
            let h = m.h_system();
            let l = m.d_system() / (2.0 * h) + (m.omega_s * k / (2.0 * h)).sqrt();
            lambda = lambda.max(l);
        }
    }
    ((dt * lambda / STEP_STABILITY).ceil() as usize).max(1)
}

/// Integrate from the power-flow equilibrium through `schedule`.
///
/// Samples are taken every `dt` from t = 0 to `duration`. An event at time t
/// takes effect at the first sample at or after t, and that sample already
/// reflects the new network. Integration stops early, with
/// [`Trajectory::loss_of_synchronism`] set, once any rotor drifts further than
/// `los_limit` from the center of inertia.
pub fn simulate(
    case: &NetworkCase,
    pf: &PowerFlowSolution,
    schedule: &EventSchedule,
    opts: &SimOptions,
) -> Result<Trajectory> {
    let SimOptions {
        duration,
        dt,
        substeps,
        los_limit,
    } = *opts;
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidInput(format!("duration {duration} must be positive")));
    }
    if !(dt.is_finite() && dt > 0.0 && dt <= duration) {
        return Err(Error::InvalidInput(format!(
            "dt {dt} must be positive and at most the duration"
        )));
    }
    if substeps == Substeps::Fixed(0) {
        return Err(Error::InvalidInput("substeps must be at least 1".into()));
    }

    let n = (duration / dt).round() as usize;
    let mut event_sample = Vec::with_capacity(schedule.events().len());
    for (i, ev) in schedule.events().iter().enumerate() {
        if ev.t >= duration {
            return Err(Error::semantic(
                format!("events[{i}]"),
                format!(
                    "event at t = {} s is not before the end of the run ({duration} s)",
                    ev.t
                ),
            ));
        }
        let k = (ev.t / dt - 1e-9).ceil().max(0.0) as usize;
        if event_sample.last() == Some(&k) {
            return Err(Error::semantic(
                format!("events[{i}]"),
                format!("event falls in the same {dt} s sample as the previous one"),
            ));
        }
        event_sample.push(k);
    }

    let sys = init_dynamic_state(case, pf)?;
    let nets = sys.networks(schedule)?;
    let configs = schedule.configs();
    let e = sys.e_internal();
    let n_sub = match substeps {
        Substeps::Auto => auto_substeps(&sys.machines, &e, &nets, dt),
        Substeps::Fixed(k) => k,
    };
    let h = dt / n_sub as f64;

    let m = sys.machines.len();
    let h_sys: Vec<f64> = sys.machines.iter().map(|p| p.h_system()).collect();
    let h_total: f64 = h_sys.iter().sum();
    let mut delta = sys.state.delta.clone();
    let mut omega = sys.state.omega_dev.clone();
    let mut ws = Workspace::new(m);
    let mut samples = Vec::with_capacity(n + 1);
    let mut los = None;
    let mut active = 0;

    for k in 0..=n {
        while active < event_sample.len() && event_sample[active] <= k {
            active += 1;
        }
        let net = &nets[active];
        let state = DynamicState {
            t: k as f64 * dt,
            delta: delta.clone(),
            omega_dev: omega.clone(),
            network_mode: configs[active].mode(active > 0),
        };
        if !state.is_finite() {
            return Err(non_finite(&state));
        }
        let mut p_e = vec![0.0; m];
        electrical_power_into(&delta, &e, &net.g, &net.b, &mut p_e);
        let v_bus = net.bus_voltages(&delta, &e);

        let coi: f64 = delta.iter().zip(&h_sys).map(|(d, h)| d * h).sum::<f64>() / h_total;
        let worst =
            (0..m).map(|i| (i, delta[i] - coi)).fold(
                (0, 0.0),
                |acc, (i, a)| if a.abs() > f64::abs(acc.1) { (i, a) } else { acc },
            );
        let t = state.t;
        samples.push(Sample { state, v_bus, p_e });
        if worst.1.abs() > los_limit {
            los = Some(LossOfSynchronism {
                t,
                generator: sys.gen_labels[worst.0].clone(),
                angle_from_coi: worst.1,
            });
            break;
        }
        if k == n {
            break;
        }
        for _ in 0..n_sub {
            rk4_in_place(&mut delta, &mut omega, &sys.machines, &e, net, h, &mut ws);
        }
    }

    Ok(Trajectory {
        dt,
        substeps: n_sub,
        base_mva: case.base_mva,
        omega_s: case.omega_s(),
        bus_ids: case.buses.iter().map(|b| b.id).collect(),
        gen_labels: sys.gen_labels,
        gen_buses: sys.gen_buses,
        gen_models: sys.gen_models,
        machines: sys.machines,
        samples,
        loss_of_synchronism: los,
    })
}
