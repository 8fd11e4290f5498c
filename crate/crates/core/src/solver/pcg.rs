use std::time::Instant;

use serde::Serialize;

use super::SolverError;
use crate::linalg::{axpy, dot, norm2, LinearOperator};

/// Symmetric positive definite approximation of `A⁻¹`.
pub trait Preconditioner: Sync {
    fn apply(&self, r: &[f64], z: &mut [f64]);

    /// True when repeated applications are not one fixed linear map, e.g.
    /// with inexact inner solves.
    fn is_variable(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PcgOptions {
    /// Tolerance on `‖r_k‖_B / ‖r_0‖_B`.
    pub tol: f64,
    pub max_iterations: usize,
    /// Polak–Ribière update of the search direction.
    pub flexible: bool,
}

impl Default for PcgOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 10_000,
            flexible: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Timings {
    pub setup_ms: f64,
    pub solve_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// `‖r_k‖_B / ‖r_0‖_B` for `k = 0..=iterations`.
    pub residual_history: Vec<f64>,
    /// `‖r_k‖ / ‖b‖` for `k = 0..=iterations`.
    pub plain_residual_history: Vec<f64>,
    pub converged: bool,
    pub timings: Timings,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }
}

/// Snapshot handed to the observer after each iteration.
pub struct IterationState<'a> {
    pub iteration: usize,
    pub x: &'a [f64],
    /// Search direction used in this iteration.
    pub direction: &'a [f64],
    pub relative_residual: f64,
}

pub fn pcg(
    op: &dyn LinearOperator,
    b: &[f64],
    prec: &dyn Preconditioner,
    opts: &PcgOptions,
) -> Result<(Vec<f64>, SolveReport), SolverError> {
    pcg_observed(op, b, prec, opts, &mut |_| {})
}

/// Preconditioned conjugate gradients from a zero initial guess.
///
/// Running out of iterations is reported through `converged = false`;
/// loss of definiteness is an error.
pub fn pcg_observed(
    op: &dyn LinearOperator,
    b: &[f64],
    prec: &dyn Preconditioner,
    opts: &PcgOptions,
    observer: &mut dyn FnMut(&IterationState),
) -> Result<(Vec<f64>, SolveReport), SolverError> {
    let start = Instant::now();
    let n = op.dim();
    if b.len() != n {
        return Err(SolverError::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    if !(opts.tol > 0.0) || !opts.tol.is_finite() {
        return Err(SolverError::InvalidOption(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    if opts.max_iterations == 0 {
        return Err(SolverError::InvalidOption("maxit must be positive".into()));
    }
    if prec.is_variable() && !opts.flexible {
        return Err(SolverError::InexactRequiresFlexible);
    }

    let mut x = vec![0.0; n];
    let b_norm = norm2(b);
    let mut report = SolveReport {
        iterations: 0,
        residual_history: Vec::new(),
        plain_residual_history: Vec::new(),
        converged: false,
        timings: Timings::default(),
    };
    if b_norm == 0.0 {
        report.residual_history.push(0.0);
        report.plain_residual_history.push(0.0);
        report.converged = true;
        report.timings.solve_ms = start.elapsed().as_secs_f64() * 1e3;
        return Ok((x, report));
    }

    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    prec.apply(&r, &mut z);
    let mut rz = dot(&r, &z);
    if !(rz > 0.0) {
        return Err(SolverError::IndefinitePreconditioner { iteration: 0 });
    }
    let rz0 = rz;
    report.residual_history.push(1.0);
    report.plain_residual_history.push(1.0);
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut r_old = vec![0.0; n];

    for k in 1..=opts.max_iterations {
        op.apply_into(&p, &mut q);
        let curvature = dot(&p, &q);
        if !(curvature > 0.0) {
            return Err(SolverError::Breakdown {
                iteration: k,
                curvature,
            });
        }
        let alpha = rz / curvature;
        axpy(alpha, &p, &mut x);
        if opts.flexible {
            r_old.copy_from_slice(&r);
        }
        axpy(-alpha, &q, &mut r);
        prec.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        if rz_new < 0.0 {
            return Err(SolverError::IndefinitePreconditioner { iteration: k });
        }
        let rel = (rz_new / rz0).sqrt();
        report.residual_history.push(rel);
        report.plain_residual_history.push(norm2(&r) / b_norm);
        report.iterations = k;
        observer(&IterationState {
            iteration: k,
            x: &x,
            direction: &p,
            relative_residual: rel,
        });
        if rel <= opts.tol {
            let plain = report.plain_residual_history[k];
            if plain > opts.tol.sqrt() {
                return Err(SolverError::SingularPreconditioner {
                    iteration: k,
                    plain_residual: plain,
                });
            }
            report.converged = true;
            break;
        }
        let beta = if opts.flexible {
            let num: f64 = z.iter().zip(r.iter().zip(&r_old)).map(|(zi, (ri, oi))| zi * (ri - oi)).sum();
            num / rz
        } else {
            rz_new / rz
        };
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        rz = rz_new;
    }
    report.timings.solve_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((x, report))
}
