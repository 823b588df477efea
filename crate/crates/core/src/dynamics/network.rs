use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::events::NetworkConfig;
use crate::error::{Error, Result};
use crate::grid_model::{build_admittance, checked_lu, AdmittanceMatrix, NetworkCase, Node, Shunt};
use crate::powerflow::PowerFlowSolution;

/// Network seen by the machines for one topology: the admittance matrix
/// reduced to the internal EMF nodes, plus the matrix that recovers bus
/// voltages from the EMFs.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedNetwork {
    pub config: NetworkConfig,
    /// Reduced to `Node::Machine(k)` in generator order.
    pub y_red: AdmittanceMatrix,
    /// `V_bus = recovery · E`, rows in case bus order.
    pub recovery: DMatrix<Complex64>,
    // Column-major real/imaginary parts of `y_red`, for the inner loop.
    pub(crate) g: Vec<f64>,
    pub(crate) b: Vec<f64>,
}

impl ReducedNetwork {
    /// Bus voltage magnitudes for machine EMFs `e∠delta`.
    pub fn bus_voltages(&self, delta: &[f64], e: &[f64]) -> Vec<f64> {
        let emf = DVector::from_iterator(e.len(), e.iter().zip(delta).map(|(&m, &a)| Complex64::from_polar(m, a)));
        (&self.recovery * emf).iter().map(|v| v.norm()).collect()
    }

    /// Complex bus voltages for machine EMFs `e∠delta`.
    pub fn bus_phasors(&self, delta: &[f64], e: &[f64]) -> Vec<Complex64> {
        let emf = DVector::from_iterator(e.len(), e.iter().zip(delta).map(|(&m, &a)| Complex64::from_polar(m, a)));
        (&self.recovery * emf).iter().copied().collect()
    }

    /// Upper bound on each machine's synchronizing coefficient,
    /// E_i·Σ_{j≠i} |Y_ij|·E_j.
    pub(crate) fn stiffness(&self, e: &[f64]) -> Vec<f64> {
        let m = e.len();
        (0..m)
            .map(|i| {
                (0..m)
                    .filter(|&j| j != i)
                    .map(|j| e[i] * self.y_red.y[(i, j)].norm() * e[j])
                    .sum()
            })
            .collect()
    }
}

/// Classical-model network: case topology with loads frozen as constant
/// impedances at the pre-fault solution and each machine behind its transient
/// reactance.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    case: NetworkCase,
    load_shunts: Vec<Shunt>,
    /// 1 / (j·xd'), system base.
    machine_y: Vec<Complex64>,
}

impl NetworkModel {
    pub fn new(case: &NetworkCase, pf: &PowerFlowSolution) -> Result<Self> {
        check_pairing(case, pf)?;
        let load_shunts = case
            .buses
            .iter()
            .zip(&pf.v)
            .filter(|(b, _)| b.load_p != 0.0 || b.load_q != 0.0)
            .map(|(b, v)| Shunt {
                bus: b.id,
                y: Complex64::new(b.load_p, -b.load_q) / case.base_mva / v.norm_sqr(),
            })
            .collect();
        let machine_y = case
            .generators
            .iter()
            .map(|g| Complex64::new(0.0, g.model.xd_prime() * case.base_mva / g.s_rated).inv())
            .collect();
        Ok(NetworkModel {
            case: case.clone(),
            load_shunts,
            machine_y,
        })
    }

    pub fn case(&self) -> &NetworkCase {
        &self.case
    }

    pub fn load_shunts(&self) -> &[Shunt] {
        &self.load_shunts
    }

    /// Full admittance matrix over buses then machine internal nodes.
    pub fn augmented(&self, config: &NetworkConfig) -> Result<AdmittanceMatrix> {
        let mut case = self.case.clone();
        for &(from, to) in &config.tripped {
            let k = case
                .branches
                .iter()
                .position(|br| br.connects(from, to))
                .ok_or_else(|| Error::InvalidInput(format!("no in-service branch {from}-{to} to trip")))?;
            case.branches.remove(k);
        }
        let mut shunts = self.load_shunts.clone();
        if let Some((bus, y)) = config.fault {
            if case.bus(bus).is_none() {
                return Err(Error::InvalidInput(format!("fault bus {bus} is not in the case")));
            }
            shunts.push(Shunt { bus, y });
        }
        let ybus = build_admittance(&case, &shunts);
        let n = ybus.order();
        let m = self.machine_y.len();
        let index = case.bus_index();
        let mut y = DMatrix::<Complex64>::zeros(n + m, n + m);
        y.view_mut((0, 0), (n, n)).copy_from(&ybus.y);
        for (k, g) in case.generators.iter().enumerate() {
            let i = index[&g.bus];
            let ym = self.machine_y[k];
            y[(i, i)] += ym;
            y[(n + k, n + k)] += ym;
            y[(i, n + k)] -= ym;
            y[(n + k, i)] -= ym;
        }
        let mut nodes = ybus.nodes;
        nodes.extend((0..m).map(Node::Machine));
        Ok(AdmittanceMatrix { nodes, y })
    }

    pub fn reduce(&self, config: &NetworkConfig) -> Result<ReducedNetwork> {
        let full = self.augmented(config)?;
        let n = self.case.buses.len();
        let m = self.machine_y.len();
        let y_nn = full.y.view((0, 0), (n, n)).into_owned();
        let y_nm = full.y.view((0, n), (n, m)).into_owned();
        let y_mn = full.y.view((n, 0), (m, n)).into_owned();
        let y_mm = full.y.view((n, n), (m, m)).into_owned();
        let lu = checked_lu(y_nn, "bus block of the machine-augmented network")?;
        let x = lu
            .solve(&y_nm)
            .ok_or_else(|| Error::Singular("bus block of the machine-augmented network".into()))?;
        let y_red = y_mm - y_mn * &x;
        let g = y_red.iter().map(|v| v.re).collect();
        let b = y_red.iter().map(|v| v.im).collect();
        Ok(ReducedNetwork {
            config: config.clone(),
            y_red: AdmittanceMatrix {
                nodes: (0..m).map(Node::Machine).collect(),
                y: y_red,
            },
            recovery: -x,
            g,
            b,
        })
    }
}

fn check_pairing(case: &NetworkCase, pf: &PowerFlowSolution) -> Result<()> {
    let ids: Vec<_> = case.buses.iter().map(|b| b.id).collect();
    if pf.bus_ids != ids || pf.v.len() != ids.len() || pf.p_gen.len() != case.generators.len() {
        return Err(Error::InvalidInput(
            "power-flow solution does not belong to this case".into(),
        ));
    }
    Ok(())
}
