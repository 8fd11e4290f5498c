//! Hybridizable discontinuous Galerkin (HDG) solver for Timoshenko beam networks.
//!
//! A beam network (a "frame") is a graph whose edges carry one-dimensional
//! Timoshenko beam equations and whose nodes are rigid joints. Every edge is
//! discretized with polynomials of arbitrary degree `p`; the edge-interior
//! unknowns are eliminated locally so the only globally coupled unknowns are
//! six values (displacement and rotation) per free node. The size of the
//! global system therefore does not depend on `p`.
//!
//! The crate is organized along the solution pipeline:
//!
//! - [`network`]: graph data model, JSON ingestion, local frames, refinement,
//!   and graph-Laplacian diagnostics.
//! - [`beam_local`]: per-edge polynomial machinery, the HDG local solver, its
//!   static condensation, the HDG projection and the closed-form
//!   constant-coefficient beam solution.
//! - [`assembly`]: condensed global SPD system, Dirichlet lifting and
//!   recovery of edgewise fields.
//! - [`solver`]: preconditioned conjugate gradients with a two-level
//!   overlapping additive Schwarz preconditioner on an artificial Cartesian
//!   coarse grid, plus spectral diagnostics.
//! - [`verify`]: manufactured solutions, L2 errors and convergence studies.
//! - [`cli`]: the `beamnet` command-line front end.

pub mod assembly;
pub mod beam_local;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod network;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};

/// Three-component column vector used for positions, displacements and loads.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3×3 matrix used for local frames and material tensors.
pub type Mat3 = nalgebra::Matrix3<f64>;
