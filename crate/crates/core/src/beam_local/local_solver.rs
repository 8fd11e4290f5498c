use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Dyn, LU};

use super::basis::{legendre_basis, PolyField, PolynomialSpace};
use super::{Block12, LocalError, LocalSolution, Vec12};
use crate::network::Edge;
use crate::{Mat3, Vec3};

/// Distributed loads on one edge, in global coordinates, as functions of the
/// arc length `x ∈ [0, h]` measured from the edge's first node.
pub trait EdgeLoads {
    fn force(&self, x: f64) -> Vec3;
    fn moment(&self, x: f64) -> Vec3;

    /// Loads known to vanish identically can skip quadrature.
    fn is_zero(&self) -> bool {
        false
    }
}

/// Identically zero loads.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoLoads;

impl EdgeLoads for NoLoads {
    fn force(&self, _x: f64) -> Vec3 {
        Vec3::zeros()
    }

    fn moment(&self, _x: f64) -> Vec3 {
        Vec3::zeros()
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// Loads given by a pair of closures `(f, g)`.
#[derive(Clone, Copy)]
pub struct LoadFns<F, G>(pub F, pub G);

impl<F: Fn(f64) -> Vec3, G: Fn(f64) -> Vec3> EdgeLoads for LoadFns<F, G> {
    fn force(&self, x: f64) -> Vec3 {
        (self.0)(x)
    }

    fn moment(&self, x: f64) -> Vec3 {
        (self.1)(x)
    }
}

/// `τ_e = c · h_e^s`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizationRule {
    exponent: i32,
    scale: f64,
}

impl StabilizationRule {
    pub fn new(exponent: i32, scale: f64) -> Result<Self, LocalError> {
        if !(-1..=1).contains(&exponent) {
            return Err(LocalError::InvalidStabilization(format!(
                "exponent must be -1, 0 or 1, got {exponent}"
            )));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(LocalError::InvalidStabilization(format!(
                "scale must be positive and finite, got {scale}"
            )));
        }
        Ok(Self { exponent, scale })
    }

    pub fn exponent(&self) -> i32 {
        self.exponent
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn tau(&self, h: f64) -> f64 {
        self.scale * h.powi(self.exponent)
    }

    /// True when `τ h` exceeds the advisory bound of 10.
    pub fn exceeds_advisory(&self, h: f64) -> bool {
        self.tau(h) * h > 10.0
    }
}

impl Default for StabilizationRule {
    fn default() -> Self {
        Self {
            exponent: 0,
            scale: 1.0,
        }
    }
}

const U: usize = 0;
const R: usize = 1;
const N: usize = 2;
const M: usize = 3;

/// `i × v` for `i = (1, 0, 0)` as a matrix.
fn cross_i() -> Mat3 {
    Mat3::new(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0)
}

/// Block-diagonal rotation of a 12-vector of hybrid data or traces.
fn rotate12(t: &Mat3, v: &Vec12) -> Vec12 {
    let mut out = Vec12::zeros();
    for b in 0..4 {
        let w = t * Vec3::new(v[3 * b], v[3 * b + 1], v[3 * b + 2]);
        out.fixed_rows_mut::<3>(3 * b).copy_from(&w);
    }
    out
}

/// Factorized HDG local solver of one edge.
///
/// The system is assembled in the edge frame, where the material tensors
/// are diagonal, and factorized once by LU with partial pivoting.
#[derive(Clone)]
pub struct LocalSolver {
    edge: usize,
    tau: f64,
    length: f64,
    frame: Mat3,
    space: Arc<PolynomialSpace>,
    lu: LU<f64, Dyn, Dyn>,
    /// Right-hand side for unit local hybrid data, `12(p+1) × 12`.
    hybrid_rhs: DMatrix<f64>,
}

impl std::fmt::Debug for LocalSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LocalSolver")
            .field("edge", &self.edge)
            .field("p", &self.space.degree())
            .field("tau", &self.tau)
            .field("length", &self.length)
            .finish()
    }
}

impl LocalSolver {
    pub fn new(edge: &Edge, space: Arc<PolynomialSpace>, tau: f64) -> Result<Self, LocalError> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(LocalError::InvalidTau { edge: edge.id, tau });
        }
        let n = space.dim();
        let h = edge.length;
        let cn = edge.material.force_stiffness();
        let cm = edge.material.moment_stiffness();
        let x = cross_i();
        let s = space.stiffness();
        let lv = space.left_values();
        let rv = space.right_values();
        let idx = |var: usize, c: usize, i: usize| (var * 3 + c) * n + i;

        let mut a = DMatrix::zeros(12 * n, 12 * n);
        let mut b = DMatrix::zeros(12 * n, 12);
        for c in 0..3 {
            for i in 0..n {
                let r1 = idx(0, c, i);
                let r2 = idx(1, c, i);
                let r3 = idx(2, c, i);
                let r4 = idx(3, c, i);
                a[(r1, idx(N, c, i))] -= h / cn[c];
                a[(r2, idx(M, c, i))] -= h / cm[c];
                for d in 0..3 {
                    if x[(c, d)] != 0.0 {
                        a[(r1, idx(R, d, i))] -= h * x[(c, d)];
                        a[(r4, idx(N, d, i))] += h * x[(c, d)];
                    }
                }
                for j in 0..n {
                    a[(r1, idx(U, c, j))] += s[(j, i)];
                    a[(r2, idx(R, c, j))] += s[(j, i)];
                    a[(r3, idx(N, c, j))] += s[(i, j)];
                    a[(r4, idx(M, c, j))] += s[(i, j)];
                    let pen = tau * (lv[j] * lv[i] + rv[j] * rv[i]);
                    a[(r3, idx(U, c, j))] += pen;
                    a[(r4, idx(R, c, j))] += pen;
                }
                // hybrid columns: λ₁ (0..3), φ₁ (3..6), λ₂ (6..9), φ₂ (9..12)
                b[(r1, c)] -= lv[i];
                b[(r1, 6 + c)] += rv[i];
                b[(r2, 3 + c)] -= lv[i];
                b[(r2, 9 + c)] += rv[i];
                b[(r3, c)] += tau * lv[i];
                b[(r3, 6 + c)] += tau * rv[i];
                b[(r4, 3 + c)] += tau * lv[i];
                b[(r4, 9 + c)] += tau * rv[i];
            }
        }
        let lu = a.lu();
        if !lu.is_invertible() {
            return Err(LocalError::Singular { edge: edge.id });
        }
        Ok(Self {
            edge: edge.id,
            tau,
            length: h,
            frame: edge.frame,
            space,
            lu,
            hybrid_rhs: b,
        })
    }

    pub fn edge(&self) -> usize {
        self.edge
    }

    pub fn degree(&self) -> usize {
        self.space.degree()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn space(&self) -> &PolynomialSpace {
        &self.space
    }

    fn solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.lu.solve(rhs).expect("factorization checked at construction")
    }

    /// Load part of the right-hand side, in the local frame.
    fn load_rhs(&self, loads: &dyn EdgeLoads) -> DVector<f64> {
        let n = self.space.dim();
        let p = n - 1;
        let h = self.length;
        let tt = self.frame.transpose();
        let mut rhs = DVector::zeros(12 * n);
        if loads.is_zero() {
            return rhs;
        }
        let mut v = vec![0.0; n];
        let mut d = vec![0.0; n];
        for (s, w) in self.space.load_quadrature().iter() {
            legendre_basis(p, s, &mut v, &mut d);
            let x = s * h;
            let f = tt * loads.force(x);
            let g = tt * loads.moment(x);
            for c in 0..3 {
                for i in 0..n {
                    rhs[(6 + c) * n + i] += h * w * f[c] * v[i];
                    rhs[(9 + c) * n + i] += h * w * g[c] * v[i];
                }
            }
        }
        rhs
    }

    /// Numerical flux traces `[−n̄(0) + τ(ū(0)−λ₁), −m̄(0) + τ(r̄(0)−φ₁),
    /// n̄(h) + τ(ū(h)−λ₂), m̄(h) + τ(r̄(h)−φ₂)]` of a local-frame solution
    /// vector, without the hybrid contribution.
    fn traces(&self, z: &[f64]) -> Vec12 {
        let n = self.space.dim();
        let lv = self.space.left_values();
        let rv = self.space.right_values();
        let at = |var: usize, c: usize, vals: &[f64]| -> f64 {
            (0..n).map(|i| z[(var * 3 + c) * n + i] * vals[i]).sum()
        };
        let mut t = Vec12::zeros();
        for c in 0..3 {
            t[c] = -at(N, c, lv) + self.tau * at(U, c, lv);
            t[3 + c] = -at(M, c, lv) + self.tau * at(R, c, lv);
            t[6 + c] = at(N, c, rv) + self.tau * at(U, c, rv);
            t[9 + c] = at(M, c, rv) + self.tau * at(R, c, rv);
        }
        t
    }

    /// Condensed 12×12 block in global coordinates; column `j` is minus the
    /// flux traces produced by unit hybrid data `j` and zero loads.
    pub fn condense(&self) -> Result<Block12, LocalError> {
        let z = self.solve(&self.hybrid_rhs);
        let mut k = Block12::zeros();
        for j in 0..12 {
            let t = self.traces(z.column(j).as_slice());
            for i in 0..12 {
                k[(i, j)] = -t[i];
            }
            k[(j, j)] += self.tau;
        }
        let mut q = Block12::zeros();
        for b in 0..4 {
            q.fixed_view_mut::<3, 3>(3 * b, 3 * b).copy_from(&self.frame);
        }
        let k = q * k * q.transpose();
        let norm = k.norm();
        let asym = (k - k.transpose()).amax();
        if asym > 1e-11 * norm {
            return Err(LocalError::Asymmetric {
                edge: self.edge,
                asymmetry: asym,
                norm,
            });
        }
        Ok((k + k.transpose()) * 0.5)
    }

    /// Flux traces (global coordinates) of the zero-hybrid solve with the
    /// given loads.
    pub fn load_traces(&self, loads: &dyn EdgeLoads) -> Vec12 {
        if loads.is_zero() {
            return Vec12::zeros();
        }
        let rhs = self.load_rhs(loads);
        let z = self.lu.solve(&rhs).expect("factorization checked at construction");
        rotate12(&self.frame, &self.traces(z.as_slice()))
    }

    /// Solve with hybrid data `[λ₁, φ₁, λ₂, φ₂]` (global coordinates).
    pub fn local_solve(&self, hybrid: &Vec12, loads: &dyn EdgeLoads) -> LocalSolution {
        let n = self.space.dim();
        let local = rotate12(&self.frame.transpose(), hybrid);
        let mut rhs = self.load_rhs(loads);
        rhs += &self.hybrid_rhs * DVector::from_column_slice(local.as_slice());
        let z = self.lu.solve(&rhs).expect("factorization checked at construction");
        let field = |var: usize| {
            let mut coeffs = DMatrix::zeros(3, n);
            for c in 0..3 {
                for i in 0..n {
                    coeffs[(c, i)] = z[(var * 3 + c) * n + i];
                }
            }
            PolyField::from_coeffs(self.length, coeffs).transformed(&self.frame)
        };
        LocalSolution {
            u: field(U),
            r: field(R),
            n: field(N),
            m: field(M),
        }
    }

    /// Flux traces `[−n̄(0)+τ(ū(0)−λ₁), …]` of a solution in global
    /// coordinates.
    pub fn flux_traces(&self, sol: &LocalSolution, hybrid: &Vec12) -> Vec12 {
        let h = self.length;
        let tau = self.tau;
        let part = |k: usize| Vec3::new(hybrid[3 * k], hybrid[3 * k + 1], hybrid[3 * k + 2]);
        let mut t = Vec12::zeros();
        let blocks = [
            -sol.n.eval(0.0) + (sol.u.eval(0.0) - part(0)) * tau,
            -sol.m.eval(0.0) + (sol.r.eval(0.0) - part(1)) * tau,
            sol.n.eval(h) + (sol.u.eval(h) - part(2)) * tau,
            sol.m.eval(h) + (sol.r.eval(h) - part(3)) * tau,
        ];
        for (b, v) in blocks.iter().enumerate() {
            t.fixed_rows_mut::<3>(3 * b).copy_from(v);
        }
        t
    }
}
