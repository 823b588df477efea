//! Independent Gauss-Seidel power flow used as a test oracle. It builds its
//! own admittance matrix from the raw branch data.

use atomgrid::{BusKind, Complex64, NetworkCase};

pub fn gauss_seidel(case: &NetworkCase, tol: f64, max_iter: usize) -> Vec<Complex64> {
    let n = case.buses.len();
    let pos = |id| case.buses.iter().position(|b| b.id == id).unwrap();
    let mut y = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for br in &case.branches {
        let (f, t) = (pos(br.from), pos(br.to));
        let ys = Complex64::new(1.0, 0.0) / Complex64::new(br.r, br.x);
        let half = Complex64::new(0.0, br.b_shunt / 2.0);
        let a = br.tap;
        y[f][f] += (ys + half) / (a * a);
        y[t][t] += ys + half;
        y[f][t] -= ys / a;
        y[t][f] -= ys / a;
    }
    let base = case.base_mva;
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for (i, b) in case.buses.iter().enumerate() {
        p[i] -= b.load_p / base;
        q[i] -= b.load_q / base;
    }
    for g in &case.generators {
        p[pos(g.bus)] += g.p_dispatch / base;
    }
    let mut v: Vec<Complex64> = case
        .buses
        .iter()
        .map(|b| Complex64::new(b.v_setpoint.unwrap_or(1.0), 0.0))
        .collect();

    for _ in 0..max_iter {
        let mut change: f64 = 0.0;
        for (i, b) in case.buses.iter().enumerate() {
            if b.kind == BusKind::Slack {
                continue;
            }
            let sum: Complex64 = (0..n).filter(|&j| j != i).map(|j| y[i][j] * v[j]).sum();
            let q_i = if b.kind == BusKind::Pv {
                -(v[i].conj() * (sum + y[i][i] * v[i])).im
            } else {
                q[i]
            };
            let s = Complex64::new(p[i], q_i);
            let mut next = (s.conj() / v[i].conj() - sum) / y[i][i];
            if b.kind == BusKind::Pv {
                next = next / next.norm() * b.v_setpoint.unwrap();
            }
            change = change.max((next - v[i]).norm());
            v[i] = next;
        }
        if change < tol {
            return v;
        }
    }
    panic!("Gauss-Seidel oracle did not converge");
}
