use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid_model::{build_admittance, generator_grounding, zbus, BusId, ImpedanceMatrix, NetworkCase};

/// Z-bus of the case network grounded through every generator's transient
/// reactance, with the listed branches taken out of service. Loads are left
/// out.
pub fn thevenin_zbus(case: &NetworkCase, tripped: &[(BusId, BusId)]) -> Result<ImpedanceMatrix> {
    let mut net = case.clone();
    for &(from, to) in tripped {
        let k = net
            .branches
            .iter()
            .position(|br| br.connects(from, to))
            .ok_or_else(|| Error::InvalidInput(format!("no in-service branch {from}-{to}")))?;
        net.branches.remove(k);
    }
    zbus(&build_admittance(&net, &generator_grounding(&net)))
}

/// Thevenin impedance seen between buses `i` and `j`: |Z_ii + Z_jj − 2·Z_ij|.
pub fn electrical_distance(z: &ImpedanceMatrix, i: BusId, j: BusId) -> Result<f64> {
    let a = z
        .bus_position(i)
        .ok_or_else(|| Error::InvalidInput(format!("bus {i} is not in the impedance matrix")))?;
    let b = z
        .bus_position(j)
        .ok_or_else(|| Error::InvalidInput(format!("bus {j} is not in the impedance matrix")))?;
    if a == b {
        return Ok(0.0);
    }
    // Written so that swapping i and j gives the bit-identical result.
    Ok(((z.z[(a, a)] + z.z[(b, b)]) - (z.z[(a, b)] + z.z[(b, a)])).norm())
}

/// Pairwise electrical distances among `buses`.
pub fn distance_matrix(z: &ImpedanceMatrix, buses: &[BusId]) -> Result<DMatrix<f64>> {
    let n = buses.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let x = electrical_distance(z, buses[i], buses[j])?;
            d[(i, j)] = x;
            d[(j, i)] = x;
        }
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Embedding {
    /// One `dim`-vector per input point.
    pub coords: Vec<Vec<f64>>,
    pub dim: usize,
    /// Eigenvalues used per axis, largest first.
    pub eigenvalues: Vec<f64>,
    /// True when fewer than `dim` positive eigenvalues existed and the
    /// trailing axes were filled with zeros.
    pub padded: bool,
}

/// Classical multidimensional scaling: double-center −½·D² and keep the top
/// `dim` eigenpairs. Each axis is oriented so that its first nonzero
/// coordinate is positive.
pub fn embed_coordinates(d: &DMatrix<f64>, dim: usize) -> Result<Embedding> {
    let n = d.nrows();
    if d.ncols() != n || n == 0 {
        return Err(Error::InvalidInput(
            "distance matrix must be square and non-empty".into(),
        ));
    }
    if dim == 0 {
        return Err(Error::InvalidInput("embedding dimension must be at least 1".into()));
    }
    let scale = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for i in 0..n {
        if d[(i, i)] != 0.0 {
            return Err(Error::InvalidInput("distance matrix must have a zero diagonal".into()));
        }
        for j in 0..i {
            if !d[(i, j)].is_finite() || (d[(i, j)] - d[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::InvalidInput(
                    "distance matrix must be finite and symmetric".into(),
                ));
            }
        }
    }

    let sq = d.map(|x| x * x);
    let row_mean: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let all_mean = row_mean.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_mean[i] - row_mean[j] + all_mean));

    let eig = b.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let top = eig.eigenvalues[order[0]].max(0.0);
    let floor = 1e-12 * top.max(scale * scale);

    let mut coords = vec![vec![0.0; dim]; n];
    let mut eigenvalues = Vec::with_capacity(dim);
    let mut padded = false;
    for axis in 0..dim {
        let Some(&k) = order.get(axis) else {
            padded = true;
            eigenvalues.push(0.0);
            continue;
        };
        let lambda = eig.eigenvalues[k];
        if !(lambda > floor) {
            padded = true;
            eigenvalues.push(0.0);
            continue;
        }
        let root = lambda.sqrt();
        let mut col: Vec<f64> = eig.eigenvectors.column(k).iter().map(|v| v * root).collect();
        let tiny = 1e-9 * col.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if col.iter().find(|x| x.abs() > tiny).is_some_and(|x| *x < 0.0) {
            col.iter_mut().for_each(|x| *x = -*x);
        }
        for (p, x) in coords.iter_mut().zip(col) {
            p[axis] = x;
        }
        eigenvalues.push(lambda);
    }
    Ok(Embedding {
        coords,
        dim,
        eigenvalues,
        padded,
    })
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
