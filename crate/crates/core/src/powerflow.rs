//! Newton-Raphson AC power flow in polar coordinates.
//!
//! Unknowns are the angles of every non-slack bus and the magnitudes of every
//! pq bus. The mismatch is scheduled minus computed injection, so each Newton
//! step solves `J·Δx = mismatch`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid_model::{build_admittance, BusId, BusKind, NetworkCase};

#[derive(Debug, Clone, PartialEq)]
pub struct PowerFlowOptions {
    /// Convergence threshold on the largest mismatch, p.u.
    pub tol: f64,
    pub max_iter: usize,
    /// Convert pv buses that violate generator reactive limits to pq.
    pub enforce_q_limits: bool,
    /// Initial voltages; the default is a flat start.
    pub warm_start: Option<Vec<Complex64>>,
}

impl Default for PowerFlowOptions {
    fn default() -> Self {
        PowerFlowOptions {
            tol: 1e-8,
            max_iter: 20,
            enforce_q_limits: false,
            warm_start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerFlowSolution {
    pub bus_ids: Vec<BusId>,
    /// Complex bus voltages, p.u., in case bus order.
    #[serde(skip)]
    pub v: Vec<Complex64>,
    /// Per-generator active injection, MW.
    pub p_gen: Vec<f64>,
    /// Per-generator reactive injection, MVAr.
    pub q_gen: Vec<f64>,
    pub iterations: usize,
    /// p.u.
    pub max_mismatch: f64,
    /// Buses switched from pv to pq by reactive-limit enforcement.
    pub q_limited: Vec<BusId>,
}

impl PowerFlowSolution {
    pub fn voltage(&self, bus: BusId) -> Option<Complex64> {
        self.bus_ids.iter().position(|b| *b == bus).map(|i| self.v[i])
    }
}

struct Problem {
    g: DMatrix<f64>,
    b: DMatrix<f64>,
    kinds: Vec<BusKind>,
    p_sched: Vec<f64>,
    q_sched: Vec<f64>,
}

impl Problem {
    fn new(case: &NetworkCase) -> Self {
        let y = build_admittance(case, &[]);
        let n = case.buses.len();
        let index = case.bus_index();
        let mut p_sched: Vec<f64> = case.buses.iter().map(|b| -b.load_p).collect();
        let q_sched: Vec<f64> = case.buses.iter().map(|b| -b.load_q / case.base_mva).collect();
        for g in &case.generators {
            p_sched[index[&g.bus]] += g.p_dispatch;
        }
        for p in p_sched.iter_mut() {
            *p /= case.base_mva;
        }
        Problem {
            g: DMatrix::from_fn(n, n, |i, j| y.y[(i, j)].re),
            b: DMatrix::from_fn(n, n, |i, j| y.y[(i, j)].im),
            kinds: case.buses.iter().map(|b| b.kind).collect(),
            p_sched,
            q_sched,
        }
    }

    fn n(&self) -> usize {
        self.kinds.len()
    }

    fn pvpq(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.kinds[i] != BusKind::Slack).collect()
    }

    fn pq(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.kinds[i] == BusKind::Pq).collect()
    }

    /// Computed injections (P, Q) in p.u.
    fn injections(&self, vm: &[f64], va: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let (g, b) = (self.g[(i, j)], self.b[(i, j)]);
                if g == 0.0 && b == 0.0 {
                    continue;
                }
                let (s, c) = (va[i] - va[j]).sin_cos();
                p[i] += vm[i] * vm[j] * (g * c + b * s);
                q[i] += vm[i] * vm[j] * (g * s - b * c);
            }
        }
        (p, q)
    }

    fn mismatch_vector(&self, vm: &[f64], va: &[f64]) -> (DVector<f64>, Vec<f64>, Vec<f64>) {
        let (p, q) = self.injections(vm, va);
        let pvpq = self.pvpq();
        let pq = self.pq();
        let f = DVector::from_iterator(
            pvpq.len() + pq.len(),
            pvpq.iter()
                .map(|&i| self.p_sched[i] - p[i])
                .chain(pq.iter().map(|&i| self.q_sched[i] - q[i])),
        );
        (f, p, q)
    }

    /// Jacobian of computed injections with respect to (θ over pv+pq, |V| over pq).
    fn jacobian(&self, vm: &[f64], va: &[f64], p: &[f64], q: &[f64]) -> DMatrix<f64> {
        let pvpq = self.pvpq();
        let pq = self.pq();
        let (na, nm) = (pvpq.len(), pq.len());
        let mut jac = DMatrix::<f64>::zeros(na + nm, na + nm);
        let (g, b) = (&self.g, &self.b);

        for (r, &i) in pvpq.iter().enumerate() {
            for (c, &j) in pvpq.iter().enumerate() {
                jac[(r, c)] = if i == j {
                    -q[i] - b[(i, i)] * vm[i] * vm[i]
                } else {
                    let (s, co) = (va[i] - va[j]).sin_cos();
                    vm[i] * vm[j] * (g[(i, j)] * s - b[(i, j)] * co)
                };
            }
            for (c, &j) in pq.iter().enumerate() {
                jac[(r, na + c)] = if i == j {
                    p[i] / vm[i] + g[(i, i)] * vm[i]
                } else {
                    let (s, co) = (va[i] - va[j]).sin_cos();
                    vm[i] * (g[(i, j)] * co + b[(i, j)] * s)
                };
            }
        }
        for (r, &i) in pq.iter().enumerate() {
            for (c, &j) in pvpq.iter().enumerate() {
                jac[(na + r, c)] = if i == j {
                    p[i] - g[(i, i)] * vm[i] * vm[i]
                } else {
                    let (s, co) = (va[i] - va[j]).sin_cos();
                    -vm[i] * vm[j] * (g[(i, j)] * co + b[(i, j)] * s)
                };
            }
            for (c, &j) in pq.iter().enumerate() {
                jac[(na + r, na + c)] = if i == j {
                    q[i] / vm[i] - b[(i, i)] * vm[i]
                } else {
                    let (s, co) = (va[i] - va[j]).sin_cos();
                    vm[i] * (g[(i, j)] * s - b[(i, j)] * co)
                };
            }
        }
        jac
    }

    /// Newton iterations from (vm, va). Returns (iterations, final mismatch).
    fn newton(&self, vm: &mut [f64], va: &mut [f64], tol: f64, max_iter: usize) -> Result<(usize, f64)> {
        let pvpq = self.pvpq();
        let pq = self.pq();
        let mut iterations = 0;
        loop {
            let (f, p, q) = self.mismatch_vector(vm, va);
            let worst = f.amax();
            if !worst.is_finite() {
                return Err(Error::NonConvergence {
                    iterations,
                    mismatch: worst,
                });
            }
            if worst < tol {
                return Ok((iterations, worst));
            }
            if iterations >= max_iter {
                return Err(Error::NonConvergence {
                    iterations,
                    mismatch: worst,
                });
            }
            let jac = self.jacobian(vm, va, &p, &q);
            let dx = jac
                .lu()
                .solve(&f)
                .ok_or_else(|| Error::Singular("power-flow Jacobian".into()))?;
            for (k, &i) in pvpq.iter().enumerate() {
                va[i] += dx[k];
            }
            for (k, &i) in pq.iter().enumerate() {
                vm[i] += dx[pvpq.len() + k];
            }
            iterations += 1;
        }
    }
}

pub fn solve_powerflow(case: &NetworkCase, opts: &PowerFlowOptions) -> Result<PowerFlowSolution> {
    case.validate()?;
    let n = case.buses.len();
    let mut problem = Problem::new(case);

    let (mut vm, mut va): (Vec<f64>, Vec<f64>) = match &opts.warm_start {
        Some(v) if v.len() == n => (
            v.iter().map(|x| x.norm()).collect(),
            v.iter().map(|x| x.arg()).collect(),
        ),
        Some(v) => {
            return Err(Error::InvalidInput(format!(
                "warm start has {} voltages, case has {n} buses",
                v.len()
            )))
        }
        None => (vec![1.0; n], vec![0.0; n]),
    };
    for (i, bus) in case.buses.iter().enumerate() {
        if let Some(v) = bus.v_setpoint.filter(|_| bus.kind != BusKind::Pq) {
            vm[i] = v;
        }
    }

    let index = case.bus_index();
    let mut q_limited = Vec::new();
    let mut total_iter = 0;
    let mut worst;
    loop {
        let remaining = opts.max_iter.saturating_sub(total_iter);
        let (it, w) = problem
            .newton(&mut vm, &mut va, opts.tol, remaining)
            .map_err(|e| match e {
                Error::NonConvergence { iterations, mismatch } => Error::NonConvergence {
                    iterations: iterations + total_iter,
                    mismatch,
                },
                other => other,
            })?;
        total_iter += it;
        worst = w;
        if !opts.enforce_q_limits {
            break;
        }
        let (_, q) = problem.injections(&vm, &va);
        let mut switched = false;
        for (i, bus) in case.buses.iter().enumerate() {
            if problem.kinds[i] != BusKind::Pv {
                continue;
            }
            let gens: Vec<_> = case.generators.iter().filter(|g| g.bus == bus.id).collect();
            let q_inj = q[i] * case.base_mva + bus.load_q;
            let qmax: f64 = gens.iter().map(|g| g.q_max.unwrap_or(f64::INFINITY)).sum();
            let qmin: f64 = gens.iter().map(|g| g.q_min.unwrap_or(f64::NEG_INFINITY)).sum();
            let limit = if q_inj > qmax {
                qmax
            } else if q_inj < qmin {
                qmin
            } else {
                continue;
            };
            problem.kinds[i] = BusKind::Pq;
            problem.q_sched[i] = (limit - bus.load_q) / case.base_mva;
            q_limited.push(bus.id);
            switched = true;
        }
        if !switched {
            break;
        }
    }

    let (p, q) = problem.injections(&vm, &va);
    let mut p_gen = vec![0.0; case.generators.len()];
    let mut q_gen = vec![0.0; case.generators.len()];
    for (i, bus) in case.buses.iter().enumerate() {
        let members: Vec<usize> = (0..case.generators.len())
            .filter(|&k| index[&case.generators[k].bus] == i)
            .collect();
        let rating: f64 = members.iter().map(|&k| case.generators[k].s_rated).sum();
        let p_bus = p[i] * case.base_mva + bus.load_p;
        let q_bus = q[i] * case.base_mva + bus.load_q;
        for &k in &members {
            let share = case.generators[k].s_rated / rating;
            p_gen[k] = p_bus * share;
            q_gen[k] = q_bus * share;
        }
    }

    Ok(PowerFlowSolution {
        bus_ids: case.buses.iter().map(|b| b.id).collect(),
        v: vm.iter().zip(&va).map(|(&m, &a)| Complex64::from_polar(m, a)).collect(),
        p_gen,
        q_gen,
        iterations: total_iter,
        max_mismatch: worst,
        q_limited,
    })
}

/// Scheduled minus computed injection (ΔP, ΔQ) per bus, p.u. Quantities that
/// are free at a bus (slack P and Q, pv Q) report zero.
pub fn mismatch(case: &NetworkCase, v: &[Complex64]) -> Result<Vec<(f64, f64)>> {
    if v.len() != case.buses.len() {
        return Err(Error::InvalidInput(format!(
            "{} voltages for {} buses",
            v.len(),
            case.buses.len()
        )));
    }
    let problem = Problem::new(case);
    let vm: Vec<f64> = v.iter().map(|x| x.norm()).collect();
    let va: Vec<f64> = v.iter().map(|x| x.arg()).collect();
    let (p, q) = problem.injections(&vm, &va);
    Ok((0..v.len())
        .map(|i| match problem.kinds[i] {
            BusKind::Slack => (0.0, 0.0),
            BusKind::Pv => (problem.p_sched[i] - p[i], 0.0),
            BusKind::Pq => (problem.p_sched[i] - p[i], problem.q_sched[i] - q[i]),
        })
        .collect())
}

/// Series I²R losses over all branches, p.u.
pub fn branch_losses(case: &NetworkCase, v: &[Complex64]) -> f64 {
    let index = case.bus_index();
    case.branches
        .iter()
        .map(|br| {
            let (vf, vt) = (v[index[&br.from]], v[index[&br.to]]);
            let i = (vf / br.tap - vt) / Complex64::new(br.r, br.x);
            br.r * i.norm_sqr()
        })
        .sum()
}
