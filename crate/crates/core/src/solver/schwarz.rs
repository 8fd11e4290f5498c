use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use super::coarse::{build_coarse_interpolation, CoarseGrid, DirichletPolicy};
use super::pcg::Preconditioner;
use super::SolverError;
use crate::assembly::CondensedSystem;
use crate::linalg::{axpy, dense, dot, CsrMatrix, SparseCholesky, TripletBuilder};
use crate::network::Network;

/// How subdomain problems are solved.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum LocalSolveMode {
    /// Sparse Cholesky factorization.
    #[default]
    Direct,
    /// Unpreconditioned CG to the given relative residual.
    Cg { rel_tol: f64 },
}

impl FromStr for LocalSolveMode {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SolverError::InvalidOption(format!("unknown local solver '{s}' (expected direct|cg:TOL)"));
        match s {
            "direct" => Ok(Self::Direct),
            "cg" => Ok(Self::Cg { rel_tol: 1e-3 }),
            _ => {
                let tol: f64 = s.strip_prefix("cg:").ok_or_else(bad)?.parse().map_err(|_| bad())?;
                if !(tol > 0.0 && tol < 1.0) {
                    return Err(SolverError::InvalidOption(format!(
                        "inner CG tolerance must lie in (0, 1), got {tol}"
                    )));
                }
                Ok(Self::Cg { rel_tol: tol })
            }
        }
    }
}

/// Which terms of the additive Schwarz sum are used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchwarzComponents {
    #[default]
    TwoLevel,
    CoarseOnly,
    LocalOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchwarzOptions {
    pub cells: [usize; 3],
    pub policy: DirichletPolicy,
    pub local: LocalSolveMode,
    pub components: SchwarzComponents,
}

impl Default for SchwarzOptions {
    fn default() -> Self {
        Self {
            cells: [2, 2, 1],
            policy: DirichletPolicy::Strict,
            local: LocalSolveMode::Direct,
            components: SchwarzComponents::TwoLevel,
        }
    }
}

enum SubdomainSolve {
    Direct(SparseCholesky),
    Cg { matrix: CsrMatrix, rel_tol: f64 },
}

struct Subdomain {
    dofs: Vec<usize>,
    solve: SubdomainSolve,
}

impl Subdomain {
    fn solve(&self, r: &[f64]) -> Vec<f64> {
        let local: Vec<f64> = self.dofs.iter().map(|&i| r[i]).collect();
        match &self.solve {
            SubdomainSolve::Direct(chol) => chol.solve(&local),
            SubdomainSolve::Cg { matrix, rel_tol } => inner_cg(matrix, &local, *rel_tol),
        }
    }
}

fn inner_cg(a: &CsrMatrix, b: &[f64], rel_tol: f64) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return x;
    }
    let mut p = r.clone();
    let mut q = vec![0.0; n];
    let mut rr = dot(&r, &r);
    for _ in 0..(10 * n).max(100) {
        a.mul_vec_into(&p, &mut q);
        let alpha = rr / dot(&p, &q);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= rel_tol * b_norm {
            break;
        }
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
    }
    x
}

struct CoarseSpace {
    /// `6F × n₀` interpolation restricted to independent columns.
    r0: CsrMatrix,
    factor: Cholesky<f64, Dyn>,
}

/// Two-level overlapping additive Schwarz preconditioner
/// `B = R₀ A₀⁻¹ R₀ᵀ + Σ_i E_i A_ii⁻¹ E_iᵀ`.
pub struct SchwarzSetup {
    dim: usize,
    coarse: Option<CoarseSpace>,
    subdomains: Vec<Subdomain>,
    variable: bool,
}

impl std::fmt::Debug for SchwarzSetup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SchwarzSetup")
            .field("dim", &self.dim)
            .field("coarse_dim", &self.coarse_dim())
            .field("subdomains", &self.subdomains.len())
            .finish()
    }
}

impl SchwarzSetup {
    pub fn build(
        system: &CondensedSystem,
        net: &Network,
        grid: &CoarseGrid,
        opts: &SchwarzOptions,
    ) -> Result<Self, SolverError> {
        let a = system.matrix();
        let dofs = system.dofs();
        let coarse = match opts.components {
            SchwarzComponents::LocalOnly => None,
            _ => Some(build_coarse(system, net, grid, opts.policy)?),
        };

        let mut subdomains = Vec::new();
        if opts.components != SchwarzComponents::CoarseOnly {
            let values = grid.node_values(net)?;
            let mut members = vec![Vec::new(); grid.num_nodes()];
            for &n in dofs.free_nodes() {
                let off = dofs.offset(n).expect("free node");
                for &(i, _) in &values[n] {
                    members[i].extend(off..off + 6);
                }
            }
            let sets: Vec<(usize, Vec<usize>)> = members
                .into_iter()
                .enumerate()
                .filter(|(_, m)| !m.is_empty())
                .collect();
            subdomains = sets
                .into_par_iter()
                .map(|(id, mut dofs)| {
                    dofs.sort_unstable();
                    let sub = a.principal_submatrix(&dofs);
                    let solve = match opts.local {
                        LocalSolveMode::Direct => SubdomainSolve::Direct(
                            SparseCholesky::factor(&sub)
                                .map_err(|source| SolverError::SubdomainFactorization { subdomain: id, source })?,
                        ),
                        LocalSolveMode::Cg { rel_tol } => SubdomainSolve::Cg { matrix: sub, rel_tol },
                    };
                    Ok(Subdomain { dofs, solve })
                })
                .collect::<Result<_, SolverError>>()?;
        }

        Ok(Self {
            dim: system.dim(),
            coarse,
            subdomains,
            variable: matches!(opts.local, LocalSolveMode::Cg { .. })
                && opts.components != SchwarzComponents::CoarseOnly,
        })
    }

    pub fn num_subdomains(&self) -> usize {
        self.subdomains.len()
    }

    /// Dimension of the coarse space after filtering.
    pub fn coarse_dim(&self) -> usize {
        self.coarse.as_ref().map_or(0, |c| c.r0.ncols())
    }

    pub fn subdomain_sizes(&self) -> Vec<usize> {
        self.subdomains.iter().map(|s| s.dofs.len()).collect()
    }

    /// Whether every dof lies in at least one subdomain.
    pub fn covers_all_dofs(&self) -> bool {
        let mut seen = vec![false; self.dim];
        for s in &self.subdomains {
            for &d in &s.dofs {
                seen[d] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }

    fn coarse_correction(&self, r: &[f64]) -> Option<Vec<f64>> {
        let c = self.coarse.as_ref()?;
        let rc = DVector::from_vec(c.r0.transpose_mul_vec(r));
        let yc = c.factor.solve(&rc);
        Some(c.r0.mul_vec(yc.as_slice()).expect("coarse dimensions"))
    }
}

fn build_coarse(
    system: &CondensedSystem,
    net: &Network,
    grid: &CoarseGrid,
    policy: DirichletPolicy,
) -> Result<CoarseSpace, SolverError> {
    let interp = build_coarse_interpolation(net, system.dofs(), grid, policy)?;
    if interp.num_columns() == 0 {
        return Err(SolverError::EmptyCoarseSpace);
    }
    let r0 = interp.expanded();
    let a = system.matrix();
    let galerkin = r0.transpose().mul_mat(&a.mul_mat(&r0)?)?.to_dense();
    // columns can be linearly dependent on the network, e.g. two grid layers
    // in a flat direction interpolate identically
    let keep = dense::independent_columns(&galerkin, 1e-10);
    if keep.is_empty() {
        return Err(SolverError::EmptyCoarseSpace);
    }
    let mut column = vec![usize::MAX; r0.ncols()];
    for (new, &old) in keep.iter().enumerate() {
        column[old] = new;
    }
    let mut b = TripletBuilder::with_capacity(r0.nrows(), keep.len(), r0.nnz());
    for i in 0..r0.nrows() {
        let (cols, vals) = r0.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if column[j] != usize::MAX {
                b.push(i, column[j], v);
            }
        }
    }
    let r0 = b.build();
    let g = DMatrix::from_fn(keep.len(), keep.len(), |i, j| galerkin[(keep[i], keep[j])]);
    let factor = g.cholesky().ok_or(SolverError::CoarseSingular)?;
    log::debug!(
        "coarse space: {} of {} columns retained",
        keep.len(),
        6 * interp.num_columns()
    );
    Ok(CoarseSpace { r0, factor })
}

impl Preconditioner for SchwarzSetup {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let (coarse, locals) = rayon::join(
            || self.coarse_correction(r),
            || {
                self.subdomains
                    .par_iter()
                    .map(|s| s.solve(r))
                    .collect::<Vec<_>>()
            },
        );
        z.iter_mut().for_each(|v| *v = 0.0);
        if let Some(c) = coarse {
            z.copy_from_slice(&c);
        }
        for (s, y) in self.subdomains.iter().zip(&locals) {
            for (&d, v) in s.dofs.iter().zip(y) {
                z[d] += v;
            }
        }
    }

    fn is_variable(&self) -> bool {
        self.variable
    }
}
