//! Manufactured solutions, L2 error norms and convergence studies.

mod exact;
mod study;

#[cfg(test)]
mod tests;

pub use exact::{
    cross_network, manufactured_network, validate_sources, CrossSolution, EdgeFields,
    ExactSolution, ManufacturedLoads, RigidMotion,
};
pub use study::{
    asymptotic_eoc, convergence_study, convergence_study_on, expected_rates, fmt_f64, l2_errors,
    p_sweep, solve_manufactured, write_convergence_csv, write_json, write_p_sweep_csv,
    ConvergenceRecord, ErrorPair, ManufacturedRun, PSweepRecord, StudyConfig,
};

use thiserror::Error;

use crate::assembly::AssemblyError;
use crate::network::NetworkError;
use crate::solver::SolverError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("edge {edge}: closed-form {quantity} deviates from finite differences by {deviation:e}")]
    SourceValidation {
        edge: usize,
        quantity: &'static str,
        deviation: f64,
    },
    #[error("invalid study configuration: {0}")]
    InvalidConfig(String),
    #[error("PCG did not converge in {iterations} iterations")]
    NotConverged { iterations: usize },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}
