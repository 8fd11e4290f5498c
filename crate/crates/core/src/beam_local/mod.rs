//! Per-edge polynomial machinery: Legendre basis, quadrature, the HDG local
//! solver and its condensation to a 12×12 nodal block, the HDG projection,
//! and the closed-form constant-coefficient solution.

mod analytic;
mod basis;
mod local_solver;
mod projection;
mod quadrature;


pub use analytic::{analytic_flux_block, analytic_local_solution, AnalyticBeam};
pub use basis::{legendre_basis, PolyField, PolynomialSpace};
pub use local_solver::{EdgeLoads, LoadFns, LocalSolver, NoLoads, StabilizationRule};
pub use projection::hdg_projection;
pub use quadrature::GaussRule;

use nalgebra::{SMatrix, SVector};
use thiserror::Error;

use crate::Vec3;

/// Nodal block ordered `(λ₁, φ₁, λ₂, φ₂)`, three components each.
pub type Block12 = SMatrix<f64, 12, 12>;
pub type Vec12 = SVector<f64, 12>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocalError {
    #[error("edge {edge}: stabilization parameter must be positive and finite, got {tau}")]
    InvalidTau { edge: usize, tau: f64 },
    #[error("invalid stabilization rule: {0}")]
    InvalidStabilization(String),
    #[error("edge {edge}: local HDG system is singular")]
    Singular { edge: usize },
    #[error("edge {edge}: condensed block asymmetry {asymmetry:e} exceeds tolerance (norm {norm:e})")]
    Asymmetric {
        edge: usize,
        asymmetry: f64,
        norm: f64,
    },
    #[error("HDG projection system is singular")]
    ProjectionSingular,
}

/// Edgewise fields `(ū, r̄, n̄, m̄)` in global coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSolution {
    pub u: PolyField,
    pub r: PolyField,
    pub n: PolyField,
    pub m: PolyField,
}

impl LocalSolution {
    pub fn zeros(p: usize, length: f64) -> Self {
        Self {
            u: PolyField::zeros(p, length),
            r: PolyField::zeros(p, length),
            n: PolyField::zeros(p, length),
            m: PolyField::zeros(p, length),
        }
    }

    pub fn degree(&self) -> usize {
        self.u.degree()
    }

    pub fn length(&self) -> f64 {
        self.u.length()
    }

    pub fn fields(&self) -> [&PolyField; 4] {
        [&self.u, &self.r, &self.n, &self.m]
    }

    /// Values `(u, r, n, m)` at arc length `x`.
    pub fn eval(&self, x: f64) -> [Vec3; 4] {
        [self.u.eval(x), self.r.eval(x), self.n.eval(x), self.m.eval(x)]
    }
}

/// Split a 12-vector into its four 3-vectors.
pub fn split12(v: &Vec12) -> [Vec3; 4] {
    std::array::from_fn(|b| Vec3::new(v[3 * b], v[3 * b + 1], v[3 * b + 2]))
}

/// Concatenate four 3-vectors.
pub fn join12(parts: [Vec3; 4]) -> Vec12 {
    let mut v = Vec12::zeros();
    for (b, p) in parts.iter().enumerate() {
        v.fixed_rows_mut::<3>(3 * b).copy_from(p);
    }
    v
}
