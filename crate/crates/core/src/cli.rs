//! Command-line front end: `validate`, `solve`, `convergence` and `precond`.
//!
//! Every command that writes files also writes a `manifest.json` with the
//! parameters, output paths and wall times of the run.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::assembly::{AssemblyOptions, CondensedSystem, DistributedLoads, GlobalSolution, Unloaded};
use crate::beam_local::StabilizationRule;
use crate::network::{graph_laplacian, lambda_min_estimate, mass_operator, parse_network, refine_uniform, EigenOptions, Network, NodeKind};
use crate::solver::{
    pcg, CoarseGrid, DirichletPolicy, IdentityPreconditioner, LocalSolveMode, PcgOptions, PreconditionerKind,
    SchwarzOptions, SchwarzSetup, SolveReport, SolverError, Timings,
};
use crate::verify::{
    asymptotic_eoc, convergence_study, expected_rates, fmt_f64, l2_errors, manufactured_network, p_sweep,
    write_convergence_csv, write_json, write_p_sweep_csv, CrossSolution, ManufacturedLoads, StudyConfig,
};
use crate::{Error, Result};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "beamnet", version, about = "HDG solver for Timoshenko beam networks")]
pub struct Cli {
    /// Worker threads for assembly and preconditioning (0: all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a network file and print diagnostics.
    Validate {
        path: PathBuf,
        /// Also write the report as JSON to this file.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Assemble and solve a network.
    Solve(SolveArgs),
    /// Convergence study on the cross network with a manufactured solution.
    Convergence(ConvergenceArgs),
    /// Compare preconditioners on one problem.
    Precond(PrecondArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Discretization {
    /// Polynomial degree.
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    /// Stabilization exponent, τ = c·h^s with s in {-1, 0, 1}.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub s: i32,
    /// Stabilization scale.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SolverFlags {
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub maxit: usize,
    /// Coarse grid cells, "nx,ny,nz".
    #[arg(long, default_value = "2,2,1", value_parser = parse_grid)]
    pub grid: [usize; 3],
    /// Coarse Dirichlet policy: strict | free.
    #[arg(long, default_value = "strict")]
    pub policy: DirichletPolicy,
    /// Subdomain solver: direct | cg | cg:TOL.
    #[arg(long, default_value = "direct")]
    pub local_solver: LocalSolveMode,
    /// Flexible (Polak–Ribière) PCG; implied by inexact subdomain solves.
    #[arg(long)]
    pub flexible: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Network file (JSON).
    pub path: PathBuf,
    /// Bisect every edge this many times before solving.
    #[arg(long, default_value_t = 0)]
    pub refine: u32,
    /// Replace boundary data and loads by those of the manufactured cross solution.
    #[arg(long)]
    pub manufactured: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub disc: Discretization,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// none | coarse | local | two-level (alias schwarz).
    #[arg(long, default_value = "two-level")]
    pub precond: PreconditionerKind,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergenceArgs {
    /// Polynomial degrees.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    pub p: Vec<usize>,
    /// Stabilization exponents.
    #[arg(long, value_delimiter = ',', default_value = "-1,0,1", allow_hyphen_values = true)]
    pub s: Vec<i32>,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 5)]
    pub levels: usize,
    /// Also run a p-sweep over the given degrees at this refinement level.
    #[arg(long)]
    pub p_sweep: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PrecondArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub disc: Discretization,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Preconditioners to compare.
    #[arg(long, value_delimiter = ',', default_value = "none,coarse,local,two-level")]
    pub modes: Vec<PreconditionerKind>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

fn parse_grid(s: &str) -> std::result::Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected nx,ny,nz, got '{s}'"));
    }
    let mut cells = [0; 3];
    for (c, p) in cells.iter_mut().zip(&parts) {
        *c = p.parse().map_err(|_| format!("invalid cell count '{p}'"))?;
        if *c == 0 {
            return Err("cell counts must be positive".into());
        }
    }
    Ok(cells)
}

/// Parameters and artifacts of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub input: Option<String>,
    pub version: String,
    pub degrees: Vec<usize>,
    pub exponents: Vec<i32>,
    pub scale: f64,
    pub solver: Option<serde_json::Value>,
    pub grid: Option<[usize; 3]>,
    pub outputs: Vec<String>,
    pub wall_time_ms: f64,
    pub details: serde_json::Value,
}

impl RunManifest {
    fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            input: None,
            version: option_env!("BEAMNET_GIT_DESCRIBE")
                .unwrap_or(env!("CARGO_PKG_VERSION"))
                .to_string(),
            degrees: Vec::new(),
            exponents: Vec::new(),
            scale: 1.0,
            solver: None,
            grid: None,
            outputs: Vec::new(),
            wall_time_ms: 0.0,
            details: serde_json::Value::Null,
        }
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            log::warn!("thread pool already initialised: {e}");
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    if e.is_input_error() {
        EXIT_INPUT
    } else if e.is_non_convergence() {
        EXIT_NOT_CONVERGED
    } else {
        EXIT_INTERNAL
    }
}

pub fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Validate { path, json } => cmd_validate(path, json.as_deref()),
        Command::Solve(args) => cmd_solve(args),
        Command::Convergence(args) => cmd_convergence(args),
        Command::Precond(args) => cmd_precond(args),
    }
}

pub fn load_network(path: &Path) -> Result<Network> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(parse_network(&text)?)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub nodes: usize,
    pub edges: usize,
    pub connected: bool,
    pub dirichlet: usize,
    pub h_min: f64,
    pub h_max: f64,
    pub lambda_min: f64,
}

pub fn validation_report(net: &Network) -> Result<ValidationReport> {
    let lambda_min = lambda_min_estimate(
        &graph_laplacian(net),
        &mass_operator(net),
        &net.dirichlet_mask(),
        &EigenOptions::default(),
    )?;
    Ok(ValidationReport {
        nodes: net.num_nodes(),
        edges: net.num_edges(),
        connected: true,
        dirichlet: net.dirichlet_count(),
        h_min: net.h_min(),
        h_max: net.h_max(),
        lambda_min,
    })
}

fn cmd_validate(path: &Path, json_out: Option<&Path>) -> Result<u8> {
    let net = load_network(path)?;
    let report = validation_report(&net)?;
    println!(
        "{} nodes, {} edges, connected, {} Dirichlet",
        report.nodes, report.edges, report.dirichlet
    );
    println!("h_min = {}", fmt_f64(report.h_min));
    println!("h_max = {}", fmt_f64(report.h_max));
    println!("lambda_min = {}", fmt_f64(report.lambda_min));
    if let Some(out) = json_out {
        write_json(out, &report)?;
    }
    Ok(EXIT_OK)
}

fn stabilization(disc: &Discretization) -> Result<StabilizationRule> {
    Ok(StabilizationRule::new(disc.s, disc.c)?)
}

fn pcg_options(flags: &SolverFlags) -> PcgOptions {
    let inexact = matches!(flags.local_solver, LocalSolveMode::Cg { .. });
    if inexact && !flags.flexible {
        log::info!("inexact subdomain solves: switching to flexible PCG");
    }
    PcgOptions {
        tol: flags.tol,
        max_iterations: flags.maxit,
        flexible: flags.flexible || inexact,
    }
}

fn solver_json(flags: &SolverFlags, kind: Option<PreconditionerKind>) -> serde_json::Value {
    let local = match flags.local_solver {
        LocalSolveMode::Direct => "direct".to_string(),
        LocalSolveMode::Cg { rel_tol } => format!("cg:{rel_tol}"),
    };
    json!({
        "pcg": pcg_options(flags),
        "grid": flags.grid,
        "policy": match flags.policy { DirichletPolicy::Strict => "strict", DirichletPolicy::Free => "free" },
        "local_solver": local,
        "preconditioner": kind.map(|k| k.name()),
    })
}

/// Network, loads and assembled system for `solve` and `precond`.
struct Problem {
    net: Network,
    system: CondensedSystem,
    manufactured: bool,
    assembly_ms: f64,
}

impl Problem {
    fn load(args: &ProblemArgs, disc: &Discretization) -> Result<Self> {
        let mut net = load_network(&args.path)?;
        if args.refine > 0 {
            net = refine_uniform(&net, args.refine);
        }
        if args.manufactured {
            net = manufactured_network(&net, &CrossSolution)?;
        }
        let rule = stabilization(disc)?;
        if net.edges().iter().any(|e| rule.exceeds_advisory(e.length)) {
            log::warn!("tau*h exceeds 10 on some edges; the local solves may be poorly conditioned");
        }
        let start = Instant::now();
        let system = CondensedSystem::assemble(&net, AssemblyOptions::new(disc.p, rule), &*loads(args.manufactured))?;
        Ok(Self {
            net,
            system,
            manufactured: args.manufactured,
            assembly_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    }
}

fn loads(manufactured: bool) -> Box<dyn DistributedLoads> {
    if manufactured {
        Box::new(ManufacturedLoads(&CrossSolution))
    } else {
        Box::new(Unloaded)
    }
}

/// Run PCG with the chosen preconditioner; setup time goes into the report.
fn solve_with(
    problem: &Problem,
    kind: PreconditionerKind,
    flags: &SolverFlags,
) -> std::result::Result<(Vec<f64>, SolveReport), SolverError> {
    let opts = pcg_options(flags);
    let sys = &problem.system;
    let Some(components) = kind.components() else {
        return pcg(sys, sys.rhs(), &IdentityPreconditioner, &opts);
    };
    let start = Instant::now();
    let grid = CoarseGrid::bounding(&problem.net, flags.grid)?;
    let setup = SchwarzSetup::build(
        sys,
        &problem.net,
        &grid,
        &SchwarzOptions {
            cells: flags.grid,
            policy: flags.policy,
            local: flags.local_solver,
            components,
        },
    )?;
    let setup_ms = start.elapsed().as_secs_f64() * 1e3;
    log::info!(
        "{}: {} subdomains, coarse dimension {}",
        kind.name(),
        setup.num_subdomains(),
        setup.coarse_dim()
    );
    let (x, mut report) = pcg(sys, sys.rhs(), &setup, &opts)?;
    report.timings.setup_ms = setup_ms;
    Ok((x, report))
}

fn write_history(path: &Path, report: &SolveReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path_string(path), std::io::Error::other(e)))?;
    let err = |e: csv::Error| Error::io(path_string(path), std::io::Error::other(e));
    w.write_record(["iteration", "relative_residual", "plain_relative_residual"]).map_err(err)?;
    for (k, (b, p)) in report.residual_history.iter().zip(&report.plain_residual_history).enumerate() {
        w.write_record([k.to_string(), fmt_f64(*b), fmt_f64(*p)]).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path_string(path), e))
}

#[derive(Serialize)]
struct NodalRecord {
    id: usize,
    position: [f64; 3],
    dirichlet: bool,
    displacement: [f64; 3],
    rotation: [f64; 3],
}

#[derive(Serialize)]
struct EdgeRecord {
    id: usize,
    nodes: [usize; 2],
    length: f64,
    degree: usize,
    tau: f64,
    /// Legendre coefficients on [0, h] in the global frame, one row per component.
    u: Vec<Vec<f64>>,
    r: Vec<Vec<f64>>,
    n: Vec<Vec<f64>>,
    m: Vec<Vec<f64>>,
}

fn arr(v: crate::Vec3) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

fn rows(field: &crate::beam_local::PolyField) -> Vec<Vec<f64>> {
    let c = field.coeffs();
    (0..3).map(|i| c.row(i).iter().copied().collect()).collect()
}

fn write_solution(out: &Path, problem: &Problem, sol: &GlobalSolution) -> Result<Vec<String>> {
    let nodal: Vec<NodalRecord> = problem
        .net
        .nodes()
        .iter()
        .map(|n| NodalRecord {
            id: n.id,
            position: arr(n.position),
            dirichlet: matches!(n.kind, NodeKind::Dirichlet { .. }),
            displacement: arr(sol.displacement(n.id)),
            rotation: arr(sol.rotation(n.id)),
        })
        .collect();
    let edges: Vec<EdgeRecord> = problem
        .net
        .edges()
        .iter()
        .map(|e| {
            let local = &sol.edges[e.id];
            EdgeRecord {
                id: e.id,
                nodes: e.nodes,
                length: e.length,
                degree: local.degree(),
                tau: problem.system.local_solver(e.id).tau(),
                u: rows(&local.u),
                r: rows(&local.r),
                n: rows(&local.n),
                m: rows(&local.m),
            }
        })
        .collect();
    let nodal_path = out.join("nodal.json");
    let edge_path = out.join("edges.json");
    write_json(&nodal_path, &nodal)?;
    write_json(&edge_path, &edges)?;
    Ok(vec![path_string(&nodal_path), path_string(&edge_path)])
}

fn cmd_solve(args: &SolveArgs) -> Result<u8> {
    let wall = Instant::now();
    let problem = Problem::load(&args.problem, &args.disc)?;
    create_dir(&args.out)?;
    let (x, mut report) = solve_with(&problem, args.precond, &args.solver)?;
    report.timings = Timings {
        setup_ms: report.timings.setup_ms + problem.assembly_ms,
        ..report.timings
    };
    println!(
        "{} dofs, {} iterations, relative residual {}, {}",
        problem.system.dim(),
        report.iterations,
        fmt_f64(report.final_residual()),
        if report.converged { "converged" } else { "NOT converged" }
    );
    let history = args.out.join("report.csv");
    write_history(&history, &report)?;
    let mut outputs = vec![path_string(&history)];

    let mut details = json!({
        "dofs": problem.system.dim(),
        "iterations": report.iterations,
        "converged": report.converged,
        "final_relative_residual": report.final_residual(),
        "timings": report.timings,
        "assembly_ms": problem.assembly_ms,
    });
    if report.converged {
        let sol = problem.system.recover(&problem.net, &x, &*loads(problem.manufactured))?;
        outputs.extend(write_solution(&args.out, &problem, &sol)?);
        let balance = problem.system.flux_balance_residual(&problem.net, &sol);
        details["flux_balance_residual"] = json!(balance);
        if problem.manufactured {
            let err = l2_errors(&problem.net, &sol, &CrossSolution);
            println!("L2 errors: primal {}, dual {}", fmt_f64(err.primal), fmt_f64(err.dual));
            details["l2_errors"] = json!(err);
        }
    }

    let mut manifest = RunManifest::new("solve");
    manifest.input = Some(path_string(&args.problem.path));
    manifest.degrees = vec![args.disc.p];
    manifest.exponents = vec![args.disc.s];
    manifest.scale = args.disc.c;
    manifest.solver = Some(solver_json(&args.solver, Some(args.precond)));
    manifest.grid = Some(args.solver.grid);
    manifest.outputs = outputs;
    manifest.details = details;
    manifest.wall_time_ms = wall.elapsed().as_secs_f64() * 1e3;
    write_json(&args.out.join("manifest.json"), &manifest)?;
    Ok(if report.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

#[derive(Debug, Serialize)]
struct SummaryRow {
    p: usize,
    s: i32,
    eoc_primal: Option<f64>,
    eoc_dual: Option<f64>,
    expected_primal: f64,
    expected_dual: f64,
}

fn cmd_convergence(args: &ConvergenceArgs) -> Result<u8> {
    let wall = Instant::now();
    create_dir(&args.out)?;
    let mut outputs = Vec::new();
    let mut summary = Vec::new();
    for &p in &args.p {
        for &s in &args.s {
            let mut cfg = StudyConfig::new(p, s, args.levels);
            cfg.scale = args.c;
            let records = convergence_study(&cfg)?;
            let path = args.out.join(format!("convergence_p{p}_s{s}.csv"));
            write_convergence_csv(&path, &records)?;
            outputs.push(path_string(&path));
            let eoc = asymptotic_eoc(&records);
            let (expected_primal, expected_dual) = expected_rates(p, s);
            summary.push(SummaryRow {
                p,
                s,
                eoc_primal: eoc.map(|e| e.0),
                eoc_dual: eoc.map(|e| e.1),
                expected_primal,
                expected_dual,
            });
        }
    }
    println!("{:>3} {:>3} {:>12} {:>12} {:>9} {:>9}", "p", "s", "eoc_primal", "eoc_dual", "expected", "expected");
    let show = |v: Option<f64>| v.map_or("-".to_string(), |e| format!("{e:.4}"));
    for row in &summary {
        println!(
            "{:>3} {:>3} {:>12} {:>12} {:>9} {:>9}",
            row.p,
            row.s,
            show(row.eoc_primal),
            show(row.eoc_dual),
            row.expected_primal,
            row.expected_dual
        );
    }
    let summary_path = args.out.join("summary.csv");
    write_summary(&summary_path, &summary)?;
    outputs.push(path_string(&summary_path));

    if let Some(level) = args.p_sweep {
        let sweep = p_sweep(level, &args.p, *args.s.first().unwrap_or(&0), args.c)?;
        let path = args.out.join(format!("p_sweep_level{level}.csv"));
        write_p_sweep_csv(&path, &sweep)?;
        outputs.push(path_string(&path));
        for r in &sweep {
            println!("p={:>2} primal {} dual {}", r.degree, fmt_f64(r.err_primal), fmt_f64(r.err_dual));
        }
    }

    let mut manifest = RunManifest::new("convergence");
    manifest.degrees = args.p.clone();
    manifest.exponents = args.s.clone();
    manifest.scale = args.c;
    manifest.grid = Some(StudyConfig::new(1, 0, 3).grid);
    manifest.outputs = outputs;
    manifest.details = json!({ "levels": args.levels, "summary": summary });
    manifest.wall_time_ms = wall.elapsed().as_secs_f64() * 1e3;
    write_json(&args.out.join("manifest.json"), &manifest)?;
    Ok(EXIT_OK)
}

fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let err = |e: csv::Error| Error::io(path_string(path), std::io::Error::other(e));
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(["p", "s", "eoc_primal", "eoc_dual", "expected_primal", "expected_dual"]).map_err(err)?;
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.p.to_string(),
            r.s.to_string(),
            opt(r.eoc_primal),
            opt(r.eoc_dual),
            fmt_f64(r.expected_primal),
            fmt_f64(r.expected_dual),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path_string(path), e))
}

#[derive(Debug, Serialize)]
struct ModeResult {
    mode: &'static str,
    iterations: Option<usize>,
    converged: bool,
    final_relative_residual: Option<f64>,
    timings: Option<Timings>,
    failure: Option<String>,
}

fn cmd_precond(args: &PrecondArgs) -> Result<u8> {
    let wall = Instant::now();
    let problem = Problem::load(&args.problem, &args.disc)?;
    create_dir(&args.out)?;
    let mut outputs = Vec::new();
    let mut results = Vec::new();
    for &kind in &args.modes {
        match solve_with(&problem, kind, &args.solver) {
            Ok((_, report)) => {
                let path = args.out.join(format!("precond_{}.csv", kind.name()));
                write_history(&path, &report)?;
                outputs.push(path_string(&path));
                println!(
                    "{:>10}: {:>6} iterations, residual {}{}",
                    kind.name(),
                    report.iterations,
                    fmt_f64(report.final_residual()),
                    if report.converged { "" } else { " (not converged)" }
                );
                results.push(ModeResult {
                    mode: kind.name(),
                    iterations: Some(report.iterations),
                    converged: report.converged,
                    final_relative_residual: Some(report.final_residual()),
                    timings: Some(report.timings),
                    failure: None,
                });
            }
            Err(e) if e.is_configuration_error() => return Err(e.into()),
            Err(e) => {
                println!("{:>10}: failed: {e}", kind.name());
                results.push(ModeResult {
                    mode: kind.name(),
                    iterations: None,
                    converged: false,
                    final_relative_residual: None,
                    timings: None,
                    failure: Some(e.to_string()),
                });
            }
        }
    }
    let any_converged = results.iter().any(|r| r.converged);

    let mut manifest = RunManifest::new("precond");
    manifest.input = Some(path_string(&args.problem.path));
    manifest.degrees = vec![args.disc.p];
    manifest.exponents = vec![args.disc.s];
    manifest.scale = args.disc.c;
    manifest.solver = Some(solver_json(&args.solver, None));
    manifest.grid = Some(args.solver.grid);
    manifest.outputs = outputs;
    manifest.details = json!({ "dofs": problem.system.dim(), "modes": results });
    manifest.wall_time_ms = wall.elapsed().as_secs_f64() * 1e3;
    write_json(&args.out.join("manifest.json"), &manifest)?;
    Ok(if any_converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}
