use std::path::Path;

use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::Serialize;

use super::exact::{cross_network, manufactured_network, validate_sources, CrossSolution, EdgeFields, ExactSolution, ManufacturedLoads};
use super::VerifyError;
use crate::assembly::{AssemblyOptions, CondensedSystem, GlobalSolution};
use crate::beam_local::{GaussRule, StabilizationRule};
use crate::network::{refine_uniform, Network};
use crate::solver::{
    direct_solve, pcg, CoarseGrid, PcgOptions, SchwarzOptions, SchwarzSetup, SolveReport,
    DENSE_DIRECT_LIMIT,
};

/// Primal `(Σ ‖u−ū‖² + ‖r−r̄‖²)^½` and dual `(Σ ‖n−n̄‖² + ‖m−m̄‖²)^½` errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorPair {
    pub primal: f64,
    pub dual: f64,
}

/// Edgewise L2 errors with a `2p + 6` point Gauss rule.
pub fn l2_errors<S: ExactSolution + ?Sized>(
    net: &Network,
    sol: &GlobalSolution,
    exact: &S,
) -> ErrorPair {
    let mut primal = 0.0;
    let mut dual = 0.0;
    for edge in net.edges() {
        let local = &sol.edges[edge.id];
        let rule = GaussRule::new(2 * local.degree() + 6);
        let fields = EdgeFields::new(exact, edge);
        let h = edge.length;
        for (s, w) in rule.iter() {
            let x = s * h;
            let [u, r, n, m] = local.eval(x);
            let wx = w * h;
            primal += wx * ((u - fields.u(x)).norm_squared() + (r - fields.r(x)).norm_squared());
            dual += wx * ((n - fields.n(x)).norm_squared() + (m - fields.m(x)).norm_squared());
        }
    }
    ErrorPair {
        primal: primal.sqrt(),
        dual: dual.sqrt(),
    }
}

/// Settings of a manufactured-solution run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StudyConfig {
    pub degree: usize,
    /// Stabilization exponent `s` in `τ = c h^s`.
    pub exponent: i32,
    /// Stabilization scale `c`.
    pub scale: f64,
    pub levels: usize,
    /// Used when the system exceeds the dense direct limit.
    pub pcg: PcgOptions,
    pub grid: [usize; 3],
}

impl StudyConfig {
    pub fn new(degree: usize, exponent: i32, levels: usize) -> Self {
        Self {
            degree,
            exponent,
            scale: 1.0,
            levels,
            pcg: PcgOptions {
                tol: 1e-12,
                ..PcgOptions::default()
            },
            grid: [2, 2, 1],
        }
    }

    fn rule(&self) -> Result<StabilizationRule, VerifyError> {
        StabilizationRule::new(self.exponent, self.scale)
            .map_err(|e| VerifyError::InvalidConfig(e.to_string()))
    }
}

/// Outcome of one manufactured solve.
pub struct ManufacturedRun {
    pub network: Network,
    pub system: CondensedSystem,
    pub solution: GlobalSolution,
    /// `None` when the system was solved directly.
    pub report: Option<SolveReport>,
}

/// Assemble and solve the manufactured problem of `exact` on `net`.
pub fn solve_manufactured<S: ExactSolution + ?Sized>(
    net: &Network,
    exact: &S,
    degree: usize,
    cfg: &StudyConfig,
) -> Result<ManufacturedRun, VerifyError> {
    let network = manufactured_network(net, exact)?;
    let loads = ManufacturedLoads(exact);
    let system = CondensedSystem::assemble(&network, AssemblyOptions::new(degree, cfg.rule()?), &loads)?;
    let (x, report) = if system.dim() <= DENSE_DIRECT_LIMIT {
        (direct_solve(&system)?, None)
    } else {
        let grid = CoarseGrid::bounding(&network, cfg.grid)?;
        let setup = SchwarzSetup::build(&system, &network, &grid, &SchwarzOptions {
            cells: cfg.grid,
            ..SchwarzOptions::default()
        })?;
        let (x, report) = pcg(&system, system.rhs(), &setup, &cfg.pcg)?;
        if !report.converged {
            return Err(VerifyError::NotConverged {
                iterations: report.iterations,
            });
        }
        (x, Some(report))
    };
    let solution = system.recover(&network, &x, &loads)?;
    Ok(ManufacturedRun {
        network,
        system,
        solution,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRecord {
    pub level: usize,
    pub h_max: f64,
    pub dofs: usize,
    pub err_primal: f64,
    pub err_dual: f64,
    pub eoc_primal: Option<f64>,
    pub eoc_dual: Option<f64>,
}

/// Errors and EOCs on the cross network over `levels` bisection levels.
pub fn convergence_study(cfg: &StudyConfig) -> Result<Vec<ConvergenceRecord>, VerifyError> {
    convergence_study_on(&cross_network(), &CrossSolution, cfg)
}

pub fn convergence_study_on<S: ExactSolution + ?Sized>(
    base: &Network,
    exact: &S,
    cfg: &StudyConfig,
) -> Result<Vec<ConvergenceRecord>, VerifyError> {
    if cfg.degree < 1 {
        return Err(VerifyError::InvalidConfig("convergence studies need p >= 1".into()));
    }
    if cfg.levels < 3 {
        return Err(VerifyError::InvalidConfig("convergence studies need at least 3 levels".into()));
    }
    cfg.rule()?;
    let mut rng = StdRng::seed_from_u64(0);
    for edge in base.edges() {
        validate_sources(exact, edge, &mut rng)?;
    }
    let mut records: Vec<ConvergenceRecord> = Vec::with_capacity(cfg.levels);
    for level in 0..cfg.levels {
        let net = refine_uniform(base, level as u32);
        let run = solve_manufactured(&net, exact, cfg.degree, cfg)?;
        let err = l2_errors(&run.network, &run.solution, exact);
        let eoc = |prev: f64, cur: f64| (prev / cur).log2();
        let (eoc_primal, eoc_dual) = match records.last() {
            Some(prev) => (
                Some(eoc(prev.err_primal, err.primal)),
                Some(eoc(prev.err_dual, err.dual)),
            ),
            None => (None, None),
        };
        log::info!(
            "p={} s={} level {level}: primal {:.3e} dual {:.3e}",
            cfg.degree,
            cfg.exponent,
            err.primal,
            err.dual
        );
        records.push(ConvergenceRecord {
            level,
            h_max: net.h_max(),
            dofs: run.system.dim(),
            err_primal: err.primal,
            err_dual: err.dual,
            eoc_primal,
            eoc_dual,
        });
    }
    Ok(records)
}

/// Mean of the last two EOC increments, `(primal, dual)`.
pub fn asymptotic_eoc(records: &[ConvergenceRecord]) -> Option<(f64, f64)> {
    let eocs: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| Some((r.eoc_primal?, r.eoc_dual?)))
        .collect();
    if eocs.len() < 2 {
        return None;
    }
    let [a, b] = [eocs[eocs.len() - 2], eocs[eocs.len() - 1]];
    Some((0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1)))
}

/// Theoretical `(primal, dual)` rates `(p + 1 − s⁺, p + 1 − |s|)`.
pub fn expected_rates(degree: usize, exponent: i32) -> (f64, f64) {
    let p = degree as f64;
    (p + 1.0 - exponent.max(0) as f64, p + 1.0 - exponent.abs() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PSweepRecord {
    pub degree: usize,
    pub err_primal: f64,
    pub err_dual: f64,
}

/// Errors on the cross network at a fixed refinement level for each degree.
pub fn p_sweep(
    level: usize,
    degrees: &[usize],
    exponent: i32,
    scale: f64,
) -> Result<Vec<PSweepRecord>, VerifyError> {
    if degrees.iter().any(|&p| !(1..=10).contains(&p)) {
        return Err(VerifyError::InvalidConfig("p-sweep degrees must lie in 1..=10".into()));
    }
    let net = refine_uniform(&cross_network(), level as u32);
    degrees
        .iter()
        .map(|&p| {
            let mut cfg = StudyConfig::new(p, exponent, level + 1);
            cfg.scale = scale;
            let run = solve_manufactured(&net, &CrossSolution, p, &cfg)?;
            let err = l2_errors(&run.network, &run.solution, &CrossSolution);
            Ok(PSweepRecord {
                degree: p,
                err_primal: err.primal,
                err_dual: err.dual,
            })
        })
        .collect()
}

/// Full-precision float formatting used in all tabular output.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn csv_error(path: &Path, e: csv::Error) -> crate::Error {
    crate::Error::io(path.display().to_string(), std::io::Error::other(e))
}

pub fn write_convergence_csv(path: &Path, records: &[ConvergenceRecord]) -> crate::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut write = |row: Vec<String>| w.write_record(&row).map_err(|e| csv_error(path, e));
    write(
        ["level", "h_max", "err_primal", "err_dual", "eoc_primal", "eoc_dual"]
            .map(String::from)
            .to_vec(),
    )?;
    for r in records {
        write(vec![
            r.level.to_string(),
            fmt_f64(r.h_max),
            fmt_f64(r.err_primal),
            fmt_f64(r.err_dual),
            opt(r.eoc_primal),
            opt(r.eoc_dual),
        ])?;
    }
    w.flush().map_err(|e| crate::Error::io(path.display().to_string(), e))
}

pub fn write_p_sweep_csv(path: &Path, records: &[PSweepRecord]) -> crate::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["p", "err_primal", "err_dual"]).map_err(|e| csv_error(path, e))?;
    for r in records {
        w.write_record([r.degree.to_string(), fmt_f64(r.err_primal), fmt_f64(r.err_dual)])
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| crate::Error::io(path.display().to_string(), e))
}

/// Pretty-printed JSON file.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> crate::Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| crate::Error::Serialize(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| crate::Error::io(path.display().to_string(), e))
}
