use serde::Serialize;

use super::SolverError;
use crate::assembly::CondensedSystem;
use crate::linalg::{dense, dot, CsrMatrix, SparseCholesky, TripletBuilder};
use crate::network::{graph_laplacian, Network};

/// Extreme eigenvalues of the pencil `A x = θ (L ⊕ … ⊕ L) x` on free dofs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralReport {
    pub theta_min: f64,
    pub theta_max: f64,
    /// Computed by a dense eigensolver (otherwise by vector iteration).
    pub dense: bool,
}

impl SpectralReport {
    pub fn ratio(&self) -> f64 {
        self.theta_max / self.theta_min
    }
}

/// Graph Laplacian on free nodes, repeated over the six nodal components
/// in the dof layout of the condensed system.
pub fn block_laplacian(system: &CondensedSystem, net: &Network) -> CsrMatrix {
    let free = system.dofs().free_nodes();
    let l = graph_laplacian(net).principal_submatrix(free);
    let n = system.dim();
    let mut b = TripletBuilder::with_capacity(n, n, 6 * l.nnz());
    for i in 0..l.nrows() {
        let (cols, vals) = l.row(i);
        for a in 0..6 {
            for (&j, &v) in cols.iter().zip(vals) {
                b.push(6 * i + a, 6 * j + a, v);
            }
        }
    }
    b.build()
}

const DENSE_LIMIT: usize = 2000;
const ITER_TOL: f64 = 1e-8;
const MAX_ITER: usize = 50_000;

pub fn spectral_equivalence_report(
    system: &CondensedSystem,
    net: &Network,
) -> Result<SpectralReport, SolverError> {
    let a = system.matrix();
    let b = block_laplacian(system, net);
    if system.dim() <= DENSE_LIMIT {
        let ev = dense::generalized_symmetric_eigenvalues(&a.to_dense(), &b.to_dense())?;
        return Ok(SpectralReport {
            theta_min: ev[0],
            theta_max: ev[ev.len() - 1],
            dense: true,
        });
    }
    let b_chol = SparseCholesky::factor(&b)?;
    let a_chol = SparseCholesky::factor(a)?;
    let theta_max = vector_iteration(a, &b, |v| b_chol.solve(&a.mul_vec(v).expect("dims")))?;
    let theta_min = vector_iteration(a, &b, |v| a_chol.solve(&b.mul_vec(v).expect("dims")))?;
    Ok(SpectralReport {
        theta_min,
        theta_max,
        dense: false,
    })
}

/// Iterate `v ← step(v)` and return the Rayleigh quotient `vᵀAv / vᵀBv` once
/// the eigen-residual is small.
fn vector_iteration(
    a: &CsrMatrix,
    b: &CsrMatrix,
    step: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<f64, SolverError> {
    let n = a.nrows();
    // deterministic start with components in all directions
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    for _ in 0..MAX_ITER {
        let mut w = step(&v);
        let bw = b.mul_vec(&w)?;
        let s = dot(&w, &bw).sqrt();
        w.iter_mut().for_each(|x| *x /= s);
        let aw = a.mul_vec(&w)?;
        let bw: Vec<f64> = bw.iter().map(|x| x / s).collect();
        let theta = dot(&w, &aw);
        let res: f64 = aw.iter().zip(&bw).map(|(x, y)| (x - theta * y).powi(2)).sum::<f64>().sqrt();
        let scale = dot(&bw, &bw).sqrt() * theta;
        v = w;
        if res <= ITER_TOL * scale {
            return Ok(theta);
        }
    }
    Err(SolverError::EigenNotConverged { iterations: MAX_ITER })
}
