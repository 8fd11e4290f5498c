use std::str::FromStr;

use super::SolverError;
use crate::assembly::DofMap;
use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::network::Network;
use crate::Vec3;

/// Shape-function values below this are treated as zero.
const SHAPE_CUTOFF: f64 = 1e-12;
/// A coarse function "touches" a Dirichlet node when its value there exceeds
/// this; smaller values only arise from the bounding-box inflation.
const TOUCH_THRESHOLD: f64 = 1e-6;

/// Cartesian grid of trilinear (Q1) shape functions on a box.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseGrid {
    lo: Vec3,
    hi: Vec3,
    cells: [usize; 3],
}

impl CoarseGrid {
    pub fn new(lo: Vec3, hi: Vec3, cells: [usize; 3]) -> Result<Self, SolverError> {
        if cells.contains(&0) {
            return Err(SolverError::InvalidGrid(format!(
                "cell counts must be positive, got {cells:?}"
            )));
        }
        if (0..3).any(|d| !(hi[d] > lo[d])) {
            return Err(SolverError::InvalidGrid("box has zero or negative extent".into()));
        }
        Ok(Self { lo, hi, cells })
    }

    /// Bounding box of the network inflated by a relative margin of `1e-9`;
    /// flat directions get a finite thickness centred on the nodes.
    pub fn bounding(net: &Network, cells: [usize; 3]) -> Result<Self, SolverError> {
        let (mut lo, mut hi) = net.bounding_box();
        let scale = (hi - lo).norm().max(1.0);
        let extent = (hi - lo).amax().max(1.0);
        for d in 0..3 {
            if hi[d] - lo[d] < 1e-12 * scale {
                lo[d] -= 0.5 * extent;
                hi[d] += 0.5 * extent;
            }
        }
        let margin = 1e-9 * scale;
        Self::new(lo.add_scalar(-margin), hi.add_scalar(margin), cells)
    }

    pub fn cells(&self) -> [usize; 3] {
        self.cells
    }

    pub fn bounds(&self) -> (Vec3, Vec3) {
        (self.lo, self.hi)
    }

    /// Number of coarse nodes `Π (n_d + 1)`.
    pub fn num_nodes(&self) -> usize {
        self.cells.iter().map(|n| n + 1).product()
    }

    fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + (self.cells[0] + 1) * (iy + (self.cells[1] + 1) * iz)
    }

    pub fn node_position(&self, i: usize) -> Vec3 {
        let nx = self.cells[0] + 1;
        let ny = self.cells[1] + 1;
        let idx = [i % nx, (i / nx) % ny, i / (nx * ny)];
        Vec3::from_fn(|d, _| {
            self.lo[d] + (self.hi[d] - self.lo[d]) * idx[d] as f64 / self.cells[d] as f64
        })
    }

    /// Nonzero shape-function values `(coarse node, φ_i(x))` at a point, or
    /// `None` outside the box.
    pub fn shape_values(&self, x: &Vec3) -> Option<Vec<(usize, f64)>> {
        let mut per_dim = [[(0usize, 0.0f64); 2]; 3];
        for d in 0..3 {
            if x[d] < self.lo[d] || x[d] > self.hi[d] {
                return None;
            }
            let n = self.cells[d];
            let t = (x[d] - self.lo[d]) / (self.hi[d] - self.lo[d]) * n as f64;
            let c = (t.floor() as usize).min(n - 1);
            let xi = t - c as f64;
            per_dim[d] = [(c, 1.0 - xi), (c + 1, xi)];
        }
        let mut out = Vec::with_capacity(8);
        for &(iz, wz) in &per_dim[2] {
            for &(iy, wy) in &per_dim[1] {
                for &(ix, wx) in &per_dim[0] {
                    let w = wx * wy * wz;
                    if w > SHAPE_CUTOFF {
                        out.push((self.index(ix, iy, iz), w));
                    }
                }
            }
        }
        Some(out)
    }

    /// Shape values at every network node.
    pub fn node_values(&self, net: &Network) -> Result<Vec<Vec<(usize, f64)>>, SolverError> {
        net.nodes()
            .iter()
            .map(|n| {
                self.shape_values(&n.position)
                    .ok_or(SolverError::NodeOutsideGrid { node: n.id })
            })
            .collect()
    }
}

/// Treatment of coarse functions whose support touches a Dirichlet node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DirichletPolicy {
    /// Drop them.
    #[default]
    Strict,
    /// Keep them.
    Free,
}

impl FromStr for DirichletPolicy {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Self::Strict),
            "free" => Ok(Self::Free),
            other => Err(SolverError::InvalidOption(format!(
                "unknown coarse policy '{other}' (expected strict|free)"
            ))),
        }
    }
}

/// Scalar coarse-to-fine interpolation on free nodes, `F × m₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseInterpolation {
    scalar: CsrMatrix,
    coarse_nodes: Vec<usize>,
}

impl CoarseInterpolation {
    pub fn scalar(&self) -> &CsrMatrix {
        &self.scalar
    }

    /// Retained coarse node ids, one per column.
    pub fn coarse_nodes(&self) -> &[usize] {
        &self.coarse_nodes
    }

    pub fn num_columns(&self) -> usize {
        self.coarse_nodes.len()
    }

    /// The same interpolation applied to each of the six nodal components,
    /// `6F × 6m₀`.
    pub fn expanded(&self) -> CsrMatrix {
        let s = &self.scalar;
        let mut b = TripletBuilder::with_capacity(6 * s.nrows(), 6 * s.ncols(), 6 * s.nnz());
        for i in 0..s.nrows() {
            let (cols, vals) = s.row(i);
            for a in 0..6 {
                for (&j, &v) in cols.iter().zip(vals) {
                    b.push(6 * i + a, 6 * j + a, v);
                }
            }
        }
        b.build()
    }
}

/// Trilinear coarse interpolation at the free network nodes.
///
/// Rows of Dirichlet nodes are removed. Columns of coarse functions that
/// vanish on every free node are removed; with [`DirichletPolicy::Strict`]
/// so are columns whose function touches a Dirichlet node.
pub fn build_coarse_interpolation(
    net: &Network,
    dofs: &DofMap,
    grid: &CoarseGrid,
    policy: DirichletPolicy,
) -> Result<CoarseInterpolation, SolverError> {
    let values = grid.node_values(net)?;
    let m = grid.num_nodes();
    let mut keep = vec![true; m];
    if policy == DirichletPolicy::Strict {
        for node in net.nodes().iter().filter(|n| n.kind.is_dirichlet()) {
            for &(i, w) in &values[node.id] {
                if w > TOUCH_THRESHOLD {
                    keep[i] = false;
                }
            }
        }
    }
    let mut used = vec![false; m];
    for &n in dofs.free_nodes() {
        for &(i, _) in &values[n] {
            used[i] = true;
        }
    }
    let mut column = vec![usize::MAX; m];
    let mut coarse_nodes = Vec::new();
    for i in 0..m {
        if keep[i] && used[i] {
            column[i] = coarse_nodes.len();
            coarse_nodes.push(i);
        }
    }
    let f = dofs.free_nodes().len();
    let mut b = TripletBuilder::new(f, coarse_nodes.len());
    for (row, &n) in dofs.free_nodes().iter().enumerate() {
        for &(i, w) in &values[n] {
            if column[i] != usize::MAX {
                b.push(row, column[i], w);
            }
        }
    }
    Ok(CoarseInterpolation {
        scalar: b.build(),
        coarse_nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid(cells: [usize; 3]) -> CoarseGrid {
        CoarseGrid::new(Vec3::zeros(), Vec3::repeat(1.0), cells).unwrap()
    }

    #[test]
    fn vertex_gives_unit_row() {
        let g = unit_grid([2, 2, 2]);
        let v = g.shape_values(&Vec3::new(0.5, 1.0, 0.0)).unwrap();
        assert_eq!(v.len(), 1);
        assert!((v[0].1 - 1.0).abs() < 1e-15);
        assert_eq!(g.node_position(v[0].0), Vec3::new(0.5, 1.0, 0.0));
    }

    #[test]
    fn cell_centre_gives_eighths() {
        let g = unit_grid([2, 3, 1]);
        let v = g.shape_values(&Vec3::new(0.25, 0.5, 0.5)).unwrap();
        assert_eq!(v.len(), 8);
        assert!(v.iter().all(|&(_, w)| (w - 0.125).abs() < 1e-15));
    }

    #[test]
    fn partition_of_unity_and_outside() {
        let g = unit_grid([3, 2, 4]);
        for x in [Vec3::new(0.1, 0.7, 0.33), Vec3::new(0.99, 0.01, 0.5)] {
            let s: f64 = g.shape_values(&x).unwrap().iter().map(|v| v.1).sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
        assert!(g.shape_values(&Vec3::new(1.1, 0.5, 0.5)).is_none());
        assert_eq!(g.num_nodes(), 4 * 3 * 5);
    }

    #[test]
    fn invalid_grids_rejected() {
        assert!(CoarseGrid::new(Vec3::zeros(), Vec3::repeat(1.0), [0, 1, 1]).is_err());
        assert!(CoarseGrid::new(Vec3::zeros(), Vec3::new(1.0, 0.0, 1.0), [1, 1, 1]).is_err());
        assert_eq!("free".parse::<DirichletPolicy>().unwrap(), DirichletPolicy::Free);
        assert!("loose".parse::<DirichletPolicy>().is_err());
    }
}
