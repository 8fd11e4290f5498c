//! Preconditioned conjugate gradients, the two-level overlapping additive
//! Schwarz preconditioner on an artificial Cartesian coarse grid, and
//! spectral diagnostics of the condensed operator.

mod coarse;
mod pcg;
mod schwarz;
mod spectral;


use std::str::FromStr;

pub use coarse::{build_coarse_interpolation, CoarseGrid, CoarseInterpolation, DirichletPolicy};
pub use pcg::{
    pcg, pcg_observed, IdentityPreconditioner, IterationState, PcgOptions, Preconditioner,
    SolveReport, Timings,
};
pub use schwarz::{LocalSolveMode, SchwarzComponents, SchwarzOptions, SchwarzSetup};
pub use spectral::{block_laplacian, spectral_equivalence_report, SpectralReport};

use nalgebra::DVector;
use thiserror::Error;

use crate::assembly::CondensedSystem;
use crate::linalg::{LinalgError, SparseCholesky};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid coarse grid: {0}")]
    InvalidGrid(String),
    #[error("network node {node} lies outside the coarse grid")]
    NodeOutsideGrid { node: usize },
    #[error("coarse space is empty after Dirichlet filtering; try a finer grid or the 'free' policy")]
    EmptyCoarseSpace,
    #[error("coarse Galerkin matrix is singular")]
    CoarseSingular,
    #[error("inexact subdomain solves require flexible PCG")]
    InexactRequiresFlexible,
    #[error("invalid solver option: {0}")]
    InvalidOption(String),
    #[error("PCG breakdown at iteration {iteration}: nonpositive curvature {curvature:e}")]
    Breakdown { iteration: usize, curvature: f64 },
    #[error("preconditioner is not positive definite (iteration {iteration})")]
    IndefinitePreconditioner { iteration: usize },
    #[error("preconditioned residual vanished at iteration {iteration} while the relative residual is {plain_residual:e}; the preconditioner is singular")]
    SingularPreconditioner { iteration: usize, plain_residual: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("subdomain {subdomain}: {source}")]
    SubdomainFactorization {
        subdomain: usize,
        #[source]
        source: LinalgError,
    },
    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    EigenNotConverged { iterations: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl SolverError {
    /// Errors caused by user-chosen solver settings.
    pub fn is_configuration_error(&self) -> bool {
        matches!(
            self,
            SolverError::InvalidGrid(_)
                | SolverError::NodeOutsideGrid { .. }
                | SolverError::EmptyCoarseSpace
                | SolverError::CoarseSingular
                | SolverError::InexactRequiresFlexible
                | SolverError::InvalidOption(_)
        )
    }
}

/// Preconditioner selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PreconditionerKind {
    None,
    Coarse,
    Local,
    #[default]
    TwoLevel,
}

impl PreconditionerKind {
    pub const ALL: [PreconditionerKind; 4] = [Self::None, Self::Coarse, Self::Local, Self::TwoLevel];

    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Coarse => "coarse",
            Self::Local => "local",
            Self::TwoLevel => "two-level",
        }
    }

    pub fn components(&self) -> Option<SchwarzComponents> {
        match self {
            Self::None => None,
            Self::Coarse => Some(SchwarzComponents::CoarseOnly),
            Self::Local => Some(SchwarzComponents::LocalOnly),
            Self::TwoLevel => Some(SchwarzComponents::TwoLevel),
        }
    }
}

impl FromStr for PreconditionerKind {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Self::None),
            "coarse" => Ok(Self::Coarse),
            "local" => Ok(Self::Local),
            "two-level" | "schwarz" => Ok(Self::TwoLevel),
            other => Err(SolverError::InvalidOption(format!(
                "unknown preconditioner '{other}' (expected none|coarse|local|two-level)"
            ))),
        }
    }
}

/// Dimension up to which [`direct_solve`] factorizes densely.
pub const DENSE_DIRECT_LIMIT: usize = 3000;

/// Direct solve of the condensed system: dense Cholesky for small systems,
/// sparse envelope Cholesky otherwise.
pub fn direct_solve(system: &CondensedSystem) -> Result<Vec<f64>, SolverError> {
    if system.dim() <= DENSE_DIRECT_LIMIT {
        let a = system.matrix().to_dense();
        let chol = a.cholesky().ok_or(LinalgError::NotPositiveDefinite {
            pivot: 0,
            value: f64::NAN,
        })?;
        Ok(chol.solve(&DVector::from_column_slice(system.rhs())).as_slice().to_vec())
    } else {
        Ok(SparseCholesky::factor(system.matrix())?.solve(system.rhs()))
    }
}
