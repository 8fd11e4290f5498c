//! Condensed global system over the free-node hybrid unknowns, Dirichlet
//! lifting, point loads and recovery of the edgewise fields.

use std::sync::Arc;

use nalgebra::SVector;
use rayon::prelude::*;
use thiserror::Error;

use crate::beam_local::{
    join12, Block12, EdgeLoads, LocalError, LocalSolution, LocalSolver, PolynomialSpace,
    StabilizationRule, Vec12,
};
use crate::linalg::{CsrMatrix, LinalgError, LinearOperator, TripletBuilder};
use crate::network::{Edge, Network, NodeKind};
use crate::Vec3;

/// Displacement and rotation of one node, `(u, r)`.
pub type Vec6 = SVector<f64, 6>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("network has no free nodes")]
    NoFreeDofs,
}

/// Distributed loads on a whole network, in global coordinates.
///
/// `x` is the arc length from the edge's first node.
pub trait DistributedLoads: Sync {
    fn force(&self, edge: &Edge, x: f64) -> Vec3;
    fn moment(&self, edge: &Edge, x: f64) -> Vec3;

    fn is_zero(&self) -> bool {
        false
    }
}

/// No distributed loads.
#[derive(Debug, Clone, Copy, Default)]
pub struct Unloaded;

impl DistributedLoads for Unloaded {
    fn force(&self, _edge: &Edge, _x: f64) -> Vec3 {
        Vec3::zeros()
    }

    fn moment(&self, _edge: &Edge, _x: f64) -> Vec3 {
        Vec3::zeros()
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// Loads given by closures of the edge and arc length.
#[derive(Clone, Copy)]
pub struct LoadClosures<F, G>(pub F, pub G);

impl<F, G> DistributedLoads for LoadClosures<F, G>
where
    F: Fn(&Edge, f64) -> Vec3 + Sync,
    G: Fn(&Edge, f64) -> Vec3 + Sync,
{
    fn force(&self, edge: &Edge, x: f64) -> Vec3 {
        (self.0)(edge, x)
    }

    fn moment(&self, edge: &Edge, x: f64) -> Vec3 {
        (self.1)(edge, x)
    }
}

/// Restriction of network loads to one edge.
struct OnEdge<'a> {
    loads: &'a dyn DistributedLoads,
    edge: &'a Edge,
}

impl EdgeLoads for OnEdge<'_> {
    fn force(&self, x: f64) -> Vec3 {
        self.loads.force(self.edge, x)
    }

    fn moment(&self, x: f64) -> Vec3 {
        self.loads.moment(self.edge, x)
    }

    fn is_zero(&self) -> bool {
        self.loads.is_zero()
    }
}

/// Map between free nodes and global dof blocks of six.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    free: Vec<usize>,
    offset: Vec<Option<usize>>,
    prescribed: Vec<Option<Vec6>>,
}

impl DofMap {
    pub fn new(net: &Network) -> Self {
        let mut free = Vec::new();
        let mut offset = Vec::with_capacity(net.num_nodes());
        let mut prescribed = Vec::with_capacity(net.num_nodes());
        for node in net.nodes() {
            match node.kind {
                NodeKind::Free { .. } => {
                    offset.push(Some(6 * free.len()));
                    prescribed.push(None);
                    free.push(node.id);
                }
                NodeKind::Dirichlet {
                    displacement,
                    rotation,
                } => {
                    offset.push(None);
                    prescribed.push(Some(stack6(displacement, rotation)));
                }
            }
        }
        Self {
            free,
            offset,
            prescribed,
        }
    }

    pub fn num_dofs(&self) -> usize {
        6 * self.free.len()
    }

    pub fn free_nodes(&self) -> &[usize] {
        &self.free
    }

    /// First global dof of a free node.
    pub fn offset(&self, node: usize) -> Option<usize> {
        self.offset[node]
    }

    /// Prescribed `(u, r)` of a Dirichlet node.
    pub fn prescribed(&self, node: usize) -> Option<Vec6> {
        self.prescribed[node]
    }

    /// Node owning global dof `dof`.
    pub fn node_of_dof(&self, dof: usize) -> usize {
        self.free[dof / 6]
    }
}

fn stack6(a: Vec3, b: Vec3) -> Vec6 {
    Vec6::new(a[0], a[1], a[2], b[0], b[1], b[2])
}

fn upper(v: &Vec6) -> Vec3 {
    Vec3::new(v[0], v[1], v[2])
}

fn lower(v: &Vec6) -> Vec3 {
    Vec3::new(v[3], v[4], v[5])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    pub degree: usize,
    pub stabilization: StabilizationRule,
    /// Quadrature points for load integrals; `None` uses `2p + 4`.
    pub load_points: Option<usize>,
}

impl AssemblyOptions {
    pub fn new(degree: usize, stabilization: StabilizationRule) -> Self {
        Self {
            degree,
            stabilization,
            load_points: None,
        }
    }

    fn space(&self) -> Result<Arc<PolynomialSpace>, AssemblyError> {
        if self.degree > 32 {
            return Err(AssemblyError::InvalidParameter(format!(
                "polynomial degree {} is out of range (0..=32)",
                self.degree
            )));
        }
        Ok(Arc::new(match self.load_points {
            Some(0) => {
                return Err(AssemblyError::InvalidParameter(
                    "load quadrature needs at least one point".into(),
                ))
            }
            Some(q) => PolynomialSpace::with_load_points(self.degree, q),
            None => PolynomialSpace::new(self.degree),
        }))
    }
}

/// Per-edge local solvers and their condensed blocks.
fn local_blocks(
    net: &Network,
    opts: &AssemblyOptions,
) -> Result<Vec<(LocalSolver, Block12)>, AssemblyError> {
    let space = opts.space()?;
    let advisory = net
        .edges()
        .iter()
        .filter(|e| opts.stabilization.exceeds_advisory(e.length))
        .count();
    if advisory > 0 {
        log::warn!("{advisory} edges have tau*h > 10");
    }
    net.edges()
        .par_iter()
        .map(|e| {
            let solver = LocalSolver::new(e, space.clone(), opts.stabilization.tau(e.length))?;
            let block = solver.condense()?;
            Ok((solver, block))
        })
        .collect()
}

/// Condensed SPD system over the free-node hybrid unknowns.
#[derive(Debug, Clone)]
pub struct CondensedSystem {
    matrix: CsrMatrix,
    rhs: Vec<f64>,
    dofs: DofMap,
    options: AssemblyOptions,
    solvers: Vec<LocalSolver>,
}

impl CondensedSystem {
    pub fn assemble(
        net: &Network,
        options: AssemblyOptions,
        loads: &dyn DistributedLoads,
    ) -> Result<Self, AssemblyError> {
        let dofs = DofMap::new(net);
        if dofs.num_dofs() == 0 {
            return Err(AssemblyError::NoFreeDofs);
        }
        let blocks = local_blocks(net, &options)?;
        let traces: Vec<Vec12> = blocks
            .par_iter()
            .zip(net.edges())
            .map(|((solver, _), edge)| solver.load_traces(&OnEdge { loads, edge }))
            .collect();

        let n = dofs.num_dofs();
        let mut builder = TripletBuilder::with_capacity(n, n, 144 * net.num_edges());
        let mut rhs = vec![0.0; n];
        for node in net.nodes() {
            if let (Some(off), NodeKind::Free { force, moment }) = (dofs.offset(node.id), node.kind) {
                for c in 0..3 {
                    rhs[off + c] -= force[c];
                    rhs[off + 3 + c] -= moment[c];
                }
            }
        }
        for (edge, ((_, k), t)) in net.edges().iter().zip(blocks.iter().zip(&traces)) {
            let mut lift = Vec12::zeros();
            for (end, &node) in edge.nodes.iter().enumerate() {
                if let Some(d) = dofs.prescribed(node) {
                    lift.fixed_rows_mut::<6>(6 * end).copy_from(&d);
                }
            }
            let local_rhs = t - k * lift;
            for (ei, &ni) in edge.nodes.iter().enumerate() {
                let Some(oi) = dofs.offset(ni) else { continue };
                for a in 0..6 {
                    rhs[oi + a] += local_rhs[6 * ei + a];
                }
                for (ej, &nj) in edge.nodes.iter().enumerate() {
                    let Some(oj) = dofs.offset(nj) else { continue };
                    for a in 0..6 {
                        for b in 0..6 {
                            builder.push(oi + a, oj + b, k[(6 * ei + a, 6 * ej + b)]);
                        }
                    }
                }
            }
        }
        Ok(Self {
            matrix: builder.build(),
            rhs,
            dofs,
            options,
            solvers: blocks.into_iter().map(|(s, _)| s).collect(),
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn options(&self) -> &AssemblyOptions {
        &self.options
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn local_solver(&self, edge: usize) -> &LocalSolver {
        &self.solvers[edge]
    }

    /// `y = A x`
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, AssemblyError> {
        self.matrix.mul_vec(x).map_err(|e| match e {
            LinalgError::DimensionMismatch { expected, got } => {
                AssemblyError::DimensionMismatch { expected, got }
            }
            other => AssemblyError::InvalidParameter(other.to_string()),
        })
    }

    /// Hybrid values of every node: the solution vector on free nodes merged
    /// with the prescribed Dirichlet data.
    pub fn nodal_values(&self, x: &[f64]) -> Result<Vec<Vec6>, AssemblyError> {
        if x.len() != self.dim() {
            return Err(AssemblyError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok((0..self.dofs.offset.len())
            .map(|node| match self.dofs.offset(node) {
                Some(off) => Vec6::from_column_slice(&x[off..off + 6]),
                None => self.dofs.prescribed(node).expect("Dirichlet node"),
            })
            .collect())
    }

    /// Rebuild the edgewise fields from a solution vector.
    pub fn recover(
        &self,
        net: &Network,
        x: &[f64],
        loads: &dyn DistributedLoads,
    ) -> Result<GlobalSolution, AssemblyError> {
        let hybrid = self.nodal_values(x)?;
        let edges = net
            .edges()
            .par_iter()
            .map(|edge| {
                let xi = edge_hybrid(&hybrid, edge);
                self.solvers[edge.id].local_solve(&xi, &OnEdge { loads, edge })
            })
            .collect();
        Ok(GlobalSolution { hybrid, edges })
    }

    /// Largest violation of the nodal flux balance over free nodes.
    pub fn flux_balance_residual(&self, net: &Network, sol: &GlobalSolution) -> f64 {
        let mut sums = vec![Vec6::zeros(); net.num_nodes()];
        for edge in net.edges() {
            let xi = edge_hybrid(&sol.hybrid, edge);
            let t = self.solvers[edge.id].flux_traces(&sol.edges[edge.id], &xi);
            for (end, &node) in edge.nodes.iter().enumerate() {
                sums[node] += t.fixed_rows::<6>(6 * end);
            }
        }
        net.nodes()
            .iter()
            .filter_map(|node| match node.kind {
                NodeKind::Free { force, moment } => {
                    let s = &sums[node.id];
                    Some((upper(s) - force).norm() + (lower(s) - moment).norm())
                }
                NodeKind::Dirichlet { .. } => None,
            })
            .fold(0.0, f64::max)
    }
}

impl LinearOperator for CondensedSystem {
    fn dim(&self) -> usize {
        self.rhs.len()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.mul_vec_into(x, y);
    }
}

fn edge_hybrid(hybrid: &[Vec6], edge: &Edge) -> Vec12 {
    let [a, b] = edge.nodes;
    join12([upper(&hybrid[a]), lower(&hybrid[a]), upper(&hybrid[b]), lower(&hybrid[b])])
}

/// Nodal hybrid values (including Dirichlet data) and edgewise fields.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSolution {
    pub hybrid: Vec<Vec6>,
    pub edges: Vec<LocalSolution>,
}

impl GlobalSolution {
    pub fn displacement(&self, node: usize) -> Vec3 {
        upper(&self.hybrid[node])
    }

    pub fn rotation(&self, node: usize) -> Vec3 {
        lower(&self.hybrid[node])
    }
}

/// Condensed matrix over all `6K` nodal unknowns, Dirichlet data ignored.
pub fn assemble_unconstrained(
    net: &Network,
    options: &AssemblyOptions,
) -> Result<CsrMatrix, AssemblyError> {
    let blocks = local_blocks(net, options)?;
    let n = 6 * net.num_nodes();
    let mut builder = TripletBuilder::with_capacity(n, n, 144 * net.num_edges());
    for (edge, (_, k)) in net.edges().iter().zip(&blocks) {
        for (ei, &ni) in edge.nodes.iter().enumerate() {
            for (ej, &nj) in edge.nodes.iter().enumerate() {
                for a in 0..6 {
                    for b in 0..6 {
                        builder.push(6 * ni + a, 6 * nj + b, k[(6 * ei + a, 6 * ej + b)]);
                    }
                }
            }
        }
    }
    Ok(builder.build())
}

/// Global rigid-body modes `(u, r)` per node: three translations and three
/// infinitesimal rotations about the centroid.
pub fn rigid_body_modes(net: &Network) -> Vec<Vec<f64>> {
    let k = net.num_nodes();
    let centroid = net.nodes().iter().map(|n| n.position).sum::<Vec3>() / k as f64;
    let mut modes = Vec::with_capacity(6);
    for c in 0..3 {
        let mut t = Vec3::zeros();
        t[c] = 1.0;
        let mut trans = vec![0.0; 6 * k];
        let mut rot = vec![0.0; 6 * k];
        for node in net.nodes() {
            let i = 6 * node.id;
            trans[i + c] = 1.0;
            let u = t.cross(&(node.position - centroid));
            rot[i..i + 3].copy_from_slice(u.as_slice());
            rot[i + 3 + c] = 1.0;
        }
        modes.push(trans);
        modes.push(rot);
    }
    modes
}
