use thiserror::Error;

use crate::assembly::AssemblyError;
use crate::beam_local::LocalError;
use crate::linalg::LinalgError;
use crate::network::NetworkError;
use crate::solver::SolverError;
use crate::verify::VerifyError;

/// Top-level error for the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization error: {0}")]
    Serialize(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user input (bad files, bad parameters).
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Network(_) | Error::Io { .. } => true,
            Error::Solver(e) => e.is_configuration_error(),
            Error::Assembly(AssemblyError::InvalidParameter(_)) => true,
            Error::Local(e) => is_bad_stabilization(e),
            Error::Assembly(AssemblyError::Local(e)) => is_bad_stabilization(e),
            Error::Verify(e) => match e {
                VerifyError::InvalidConfig(_) | VerifyError::Network(_) => true,
                VerifyError::Solver(s) => s.is_configuration_error(),
                VerifyError::Assembly(AssemblyError::InvalidParameter(_)) => true,
                _ => false,
            },
            _ => false,
        }
    }

    /// True when an iterative solve ran out of iterations.
    pub fn is_non_convergence(&self) -> bool {
        matches!(self, Error::Verify(VerifyError::NotConverged { .. }))
    }
}

fn is_bad_stabilization(e: &LocalError) -> bool {
    matches!(e, LocalError::InvalidTau { .. } | LocalError::InvalidStabilization(_))
}
