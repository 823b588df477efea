use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::case::{BusId, NetworkCase};
use crate::error::{Error, Result};

/// A node of an admittance network: a bus, or the internal EMF node of the
/// generator with the given index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Bus(BusId),
    Machine(usize),
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Bus(b) => write!(f, "bus {b}"),
            Node::Machine(k) => write!(f, "machine {k}"),
        }
    }
}

/// Shunt admittance added to the diagonal at `bus`, p.u.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shunt {
    pub bus: BusId,
    pub y: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceMatrix {
    pub nodes: Vec<Node>,
    pub y: DMatrix<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceMatrix {
    pub nodes: Vec<Node>,
    pub z: DMatrix<Complex64>,
}

impl AdmittanceMatrix {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn position(&self, node: Node) -> Option<usize> {
        self.nodes.iter().position(|n| *n == node)
    }

    pub fn get(&self, a: Node, b: Node) -> Option<Complex64> {
        Some(self.y[(self.position(a)?, self.position(b)?)])
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.order();
        (0..n).all(|i| (0..i).all(|j| (self.y[(i, j)] - self.y[(j, i)]).norm() <= tol))
    }
}

impl ImpedanceMatrix {
    pub fn position(&self, node: Node) -> Option<usize> {
        self.nodes.iter().position(|n| *n == node)
    }

    pub fn bus_position(&self, bus: BusId) -> Option<usize> {
        self.position(Node::Bus(bus))
    }
}

/// Assemble the bus admittance matrix from branches (series impedance, line
/// charging, off-nominal taps on the `from` side) plus any extra shunts.
pub fn build_admittance(case: &NetworkCase, shunts: &[Shunt]) -> AdmittanceMatrix {
    let index = case.bus_index();
    let n = case.buses.len();
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for br in &case.branches {
        let (f, t) = (index[&br.from], index[&br.to]);
        let ys = Complex64::new(br.r, br.x).inv();
        let ych = Complex64::new(0.0, br.b_shunt / 2.0);
        let tap = br.tap;
        y[(f, f)] += (ys + ych) / (tap * tap);
        y[(t, t)] += ys + ych;
        y[(f, t)] -= ys / tap;
        y[(t, f)] -= ys / tap;
    }
    for s in shunts {
        let k = index[&s.bus];
        y[(k, k)] += s.y;
    }
    AdmittanceMatrix {
        nodes: case.buses.iter().map(|b| Node::Bus(b.id)).collect(),
        y,
    }
}

/// Shunts that ground every generator bus through the unit's transient
/// reactance (converted to the system base).
pub fn generator_grounding(case: &NetworkCase) -> Vec<Shunt> {
    case.generators
        .iter()
        .map(|g| Shunt {
            bus: g.bus,
            y: Complex64::new(0.0, g.model.xd_prime() * case.base_mva / g.s_rated).inv(),
        })
        .collect()
}

const PIVOT_RATIO: f64 = 1e-12;

/// LU factorization that refuses (near-)singular matrices.
pub(crate) fn checked_lu(
    m: DMatrix<Complex64>,
    what: &str,
) -> Result<nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>> {
    if m.nrows() == 0 {
        return Ok(m.lu());
    }
    let lu = m.lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].norm()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || !(min > PIVOT_RATIO * max) {
        return Err(Error::Singular(format!(
            "{what} (pivot ratio {:.1e})",
            if max > 0.0 { min / max } else { 0.0 }
        )));
    }
    Ok(lu)
}

/// Eliminate every node not in `keep`. Kept nodes stay in their original
/// order.
pub fn kron_reduce(y: &AdmittanceMatrix, keep: &[Node]) -> Result<AdmittanceMatrix> {
    for k in keep {
        if y.position(*k).is_none() {
            return Err(Error::InvalidInput(format!("{k} is not in the network")));
        }
    }
    let (kept, elim): (Vec<usize>, Vec<usize>) = (0..y.order()).partition(|&i| keep.contains(&y.nodes[i]));
    let nodes: Vec<Node> = kept.iter().map(|&i| y.nodes[i]).collect();
    if elim.is_empty() {
        return Ok(AdmittanceMatrix {
            nodes,
            y: y.y.select_rows(&kept).select_columns(&kept),
        });
    }

    let y_kk = y.y.select_rows(&kept).select_columns(&kept);
    let y_ke = y.y.select_rows(&kept).select_columns(&elim);
    let y_ek = y.y.select_rows(&elim).select_columns(&kept);
    let y_ee = y.y.select_rows(&elim).select_columns(&elim);

    let lu = checked_lu(y_ee, "eliminated block of Kron reduction")?;
    let x = lu
        .solve(&y_ek)
        .ok_or_else(|| Error::Singular("eliminated block of Kron reduction".into()))?;
    Ok(AdmittanceMatrix {
        nodes,
        y: y_kk - y_ke * x,
    })
}

/// Invert a grounded admittance matrix.
pub fn zbus(y: &AdmittanceMatrix) -> Result<ImpedanceMatrix> {
    let lu = checked_lu(
        y.y.clone(),
        "admittance matrix (ground the network through loads or generator reactances)",
    )?;
    let z = lu
        .try_inverse()
        .ok_or_else(|| Error::Singular("admittance matrix".into()))?;
    Ok(ImpedanceMatrix {
        nodes: y.nodes.clone(),
        z,
    })
}
