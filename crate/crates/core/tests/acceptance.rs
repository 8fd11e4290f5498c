//! Acceptance criteria AC1–AC9. Prints one PASS/FAIL line per criterion.

mod common;

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use beamnet::assembly::{assemble_unconstrained, rigid_body_modes, AssemblyOptions, CondensedSystem, Unloaded};
use beamnet::beam_local::{
    analytic_flux_block, analytic_local_solution, hdg_projection, GaussRule, LocalSolution, LocalSolver, NoLoads,
    PolyField, PolynomialSpace, StabilizationRule,
};
use beamnet::linalg::SparseCholesky;
use beamnet::network::{refine_uniform, Network};
use beamnet::solver::{
    direct_solve, pcg, spectral_equivalence_report, CoarseGrid, IdentityPreconditioner, PcgOptions,
    SchwarzOptions, SchwarzSetup, DENSE_DIRECT_LIMIT,
};
use beamnet::verify::{
    convergence_study, cross_network, expected_rates, manufactured_network, p_sweep, CrossSolution,
    ManufacturedLoads, StudyConfig,
};
use beamnet::Vec3;
use common::{corpus, random_material, random_network, random_single_edge, random_vec};
use nalgebra::SVector;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn field_distance(a: &PolyField, b: &PolyField) -> (f64, f64) {
    let h = a.length();
    let rule = GaussRule::new(a.degree().max(b.degree()) + 10);
    let d = h * rule.integrate(|s| (a.eval(s * h) - b.eval(s * h)).norm_squared());
    let n = h * rule.integrate(|s| b.eval(s * h).norm_squared());
    (d, n)
}

fn relative_l2(sol: &LocalSolution, reference: &LocalSolution) -> f64 {
    let (mut d, mut n) = (0.0, 0.0);
    for (a, b) in sol.fields().into_iter().zip(reference.fields()) {
        let (di, ni) = field_distance(a, b);
        d += di;
        n += ni;
    }
    (d / n).sqrt()
}

fn ac1_local_exactness() -> Outcome {
    let mut rng = StdRng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for draw in 0..100 {
        let material = random_material(&mut rng);
        let net = random_single_edge(&mut rng, material);
        let edge = net.edge(0);
        let h = edge.length;
        let p = 3 + draw % 4;
        let space = Arc::new(PolynomialSpace::new(p));
        let hybrid = SVector::<f64, 12>::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let reference = analytic_local_solution(edge, &hybrid);
        for tau in [1.0 / h, 1.0, h] {
            let solver = LocalSolver::new(edge, space.clone(), tau).map_err(|e| e.to_string())?;
            let sol = solver.local_solve(&hybrid, &NoLoads);
            worst = worst.max(relative_l2(&sol, &reference));
        }
    }
    check(worst <= 1e-9, format!("max relative L2 error {worst:.2e} over 100 draws x 3 tau"))
}

fn ac2_condensed_block() -> Outcome {
    let mut rng = StdRng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let material = random_material(&mut rng);
        let net = random_single_edge(&mut rng, material);
        let edge = net.edge(0);
        let p = 3 + i % 4;
        let tau = rng.random_range(0.2..5.0);
        let solver = LocalSolver::new(edge, Arc::new(PolynomialSpace::new(p)), tau).map_err(|e| e.to_string())?;
        let k = solver.condense().map_err(|e| e.to_string())?;
        let exact = analytic_flux_block(edge);
        worst = worst.max((k - exact).norm() / exact.norm());
    }
    check(worst <= 1e-9, format!("max relative Frobenius error {worst:.2e} on 50 edges"))
}

fn ac3_spd_and_kernel() -> Outcome {
    let mut rng = StdRng::seed_from_u64(303);
    let mut kernel: f64 = 0.0;
    let mut asym: f64 = 0.0;
    for trial in 0..10 {
        let net = random_network(&mut rng, 20, 8);
        let p = 1 + trial % 4;
        let opts = AssemblyOptions::new(p, StabilizationRule::default());
        let a = assemble_unconstrained(&net, &opts).map_err(|e| e.to_string())?;
        let norm = a.frobenius_norm();
        for mode in rigid_body_modes(&net) {
            let av = a.mul_vec(&mode).map_err(|e| e.to_string())?;
            let scale = mode.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let r = av.iter().fold(0.0_f64, |m, v| m.max(v.abs())) / (norm * scale);
            kernel = kernel.max(r);
        }
        let sys = CondensedSystem::assemble(&net, opts, &Unloaded).map_err(|e| e.to_string())?;
        asym = asym.max(sys.matrix().max_asymmetry() / sys.matrix().frobenius_norm());
        SparseCholesky::factor(sys.matrix()).map_err(|e| format!("Cholesky failed: {e}"))?;
        sys.matrix().to_dense().cholesky().ok_or("dense Cholesky failed")?;
    }
    check(
        kernel <= 1e-9 && asym <= 1e-11,
        format!("rigid-mode residual {kernel:.2e}*|A|, asymmetry {asym:.2e}, Cholesky ok on 10 networks"),
    )
}

fn ac4_convergence_rates() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for p in [1, 2] {
        for s in [-1, 0, 1] {
            let records = convergence_study(&StudyConfig::new(p, s, 6)).map_err(|e| e.to_string())?;
            let last = records.last().expect("levels");
            let (primal, dual) = (last.eoc_primal.unwrap(), last.eoc_dual.unwrap());
            let (ep, ed) = expected_rates(p, s);
            let pass = (primal - ep).abs() <= 0.15 && (dual - ed).abs() <= 0.15;
            ok &= pass;
            lines.push(format!(
                "p={p} s={s:+}: primal {primal:.3} (exp {ep}), dual {dual:.3} (exp {ed}){}",
                if pass { "" } else { " <-- off" }
            ));
        }
    }
    check(ok, lines.join("; "))
}

fn ac5_p_sweep() -> Outcome {
    let degrees: Vec<usize> = (1..=8).collect();
    let records = p_sweep(2, &degrees, 0, 1.0).map_err(|e| e.to_string())?;
    let errs: Vec<f64> = records.iter().map(|r| r.err_primal).collect();
    let mut ok = true;
    for w in errs.windows(2) {
        if w[0] > 1e-11 && w[1] >= w[0] {
            ok = false;
        }
    }
    // curvature of log10(err) over the pre-plateau range
    let logs: Vec<f64> = errs.iter().take_while(|&&e| e > 1e-11).map(|e| e.log10()).collect();
    let curvature = logs
        .windows(3)
        .map(|w| w[2] - 2.0 * w[1] + w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    ok &= logs.len() < 3 || curvature <= 0.1;
    let table: Vec<String> = errs.iter().map(|e| format!("{e:.1e}")).collect();
    check(ok, format!("errors p=1..8: [{}], max second difference of log10 {curvature:.3}", table.join(", ")))
}

fn cross_system(level: u32, p: usize) -> (Network, CondensedSystem) {
    let net = manufactured_network(&refine_uniform(&cross_network(), level), &CrossSolution).unwrap();
    let sys = CondensedSystem::assemble(
        &net,
        AssemblyOptions::new(p, StabilizationRule::default()),
        &ManufacturedLoads(&CrossSolution),
    )
    .unwrap();
    (net, sys)
}

fn ac6_uniformity() -> Outcome {
    let opts = PcgOptions::default();
    let mut two_level = Vec::new();
    let mut plain_k5 = 0;
    for level in 2..=5 {
        let (net, sys) = cross_system(level, 3);
        let grid = CoarseGrid::bounding(&net, [2, 2, 1]).map_err(|e| e.to_string())?;
        let setup = SchwarzSetup::build(&sys, &net, &grid, &SchwarzOptions::default()).map_err(|e| e.to_string())?;
        let (_, rep) = pcg(&sys, sys.rhs(), &setup, &opts).map_err(|e| e.to_string())?;
        if !rep.converged {
            return Err(format!("two-level PCG did not converge at k={level}"));
        }
        two_level.push(rep.iterations);
        if level == 5 {
            let (_, rep) = pcg(&sys, sys.rhs(), &IdentityPreconditioner, &opts).map_err(|e| e.to_string())?;
            plain_k5 = rep.iterations;
        }
    }
    let max = *two_level.iter().max().unwrap() as f64;
    let min = *two_level.iter().min().unwrap() as f64;
    let last = *two_level.last().unwrap() as f64;
    check(
        max / min < 2.0 && plain_k5 as f64 >= 3.0 * last,
        format!("two-level iterations k=2..5 {two_level:?}, unpreconditioned at k=5: {plain_k5}"),
    )
}

fn ac7_spectral() -> Outcome {
    let mut ratios = Vec::new();
    for level in 0..=3 {
        let (net, sys) = cross_system(level, 1);
        let rep = spectral_equivalence_report(&sys, &net).map_err(|e| e.to_string())?;
        if !(rep.theta_min > 0.0) {
            return Err(format!("theta_min {} at k={level}", rep.theta_min));
        }
        ratios.push(rep.ratio());
    }
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let table: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    check(max / min < 2.0, format!("theta_max/theta_min k=0..3: [{}], spread {:.3}", table.join(", "), max / min))
}

fn ac8_solver_oracle() -> Outcome {
    let mut cases: Vec<(String, Network)> = corpus();
    for level in 0..=3 {
        cases.push((
            format!("cross k={level} manufactured"),
            manufactured_network(&refine_uniform(&cross_network(), level), &CrossSolution).unwrap(),
        ));
    }
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (name, net) in &cases {
        for p in [1, 3] {
            let sys = CondensedSystem::assemble(net, AssemblyOptions::new(p, StabilizationRule::default()), &ManufacturedLoads(&CrossSolution))
                .map_err(|e| format!("{name}: {e}"))?;
            if sys.dim() > 500 || sys.dim() > DENSE_DIRECT_LIMIT {
                continue;
            }
            let direct = direct_solve(&sys).map_err(|e| format!("{name}: {e}"))?;
            let grid = CoarseGrid::bounding(net, [2, 2, 1]).map_err(|e| format!("{name}: {e}"))?;
            let setup = SchwarzSetup::build(&sys, net, &grid, &SchwarzOptions::default()).map_err(|e| format!("{name}: {e}"))?;
            let opts = PcgOptions { tol: 1e-12, ..Default::default() };
            let (x, rep) = pcg(&sys, sys.rhs(), &setup, &opts).map_err(|e| format!("{name}: {e}"))?;
            if !rep.converged {
                return Err(format!("{name}: PCG did not converge"));
            }
            let diff: f64 = x.iter().zip(&direct).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let norm: f64 = direct.iter().map(|v| v * v).sum::<f64>().sqrt();
            worst = worst.max(if norm > 0.0 { diff / norm } else { diff });
            count += 1;
        }
    }
    check(worst <= 1e-8, format!("max relative difference {worst:.2e} over {count} systems"))
}

fn ac9_projection() -> Outcome {
    let mut rng = StdRng::seed_from_u64(909);
    let mut worst_condition: f64 = 0.0;
    for _ in 0..50 {
        let h = rng.random_range(0.1..2.0);
        let tau = rng.random_range(0.2..5.0);
        let (a, b, c) = (random_vec(&mut rng, 2.0), random_vec(&mut rng, 2.0), random_vec(&mut rng, 1.0));
        let u = move |x: f64| Vec3::new((a[0] * x).sin(), (a[1] * x + b[0]).cos(), (c[0] * x).exp());
        let n = move |x: f64| Vec3::new((b[1] * x).cos(), x * x * c[1] + (a[2] * x).sin(), (b[2] * x + c[2]).sin());
        for p in 1..=4 {
            let (p1, p2) = hdg_projection(u, n, h, p, tau).map_err(|e| e.to_string())?;
            let rule = GaussRule::new(40);
            // orthogonality to degree p-1, tested with monomials in the reference variable
            for i in 0..p {
                let mut m1 = Vec3::zeros();
                let mut m2 = Vec3::zeros();
                for (s, w) in rule.iter() {
                    let x = s * h;
                    let wi = w * h * (2.0 * s - 1.0).powi(i as i32);
                    m1 += (p1.eval(x) - u(x)) * wi;
                    m2 += (p2.eval(x) - n(x)) * wi;
                }
                worst_condition = worst_condition.max(m1.amax()).max(m2.amax());
            }
            let left = (-p2.eval(0.0) + p1.eval(0.0) * tau) - (-n(0.0) + u(0.0) * tau);
            let right = (p2.eval(h) + p1.eval(h) * tau) - (n(h) + u(h) * tau);
            worst_condition = worst_condition.max(left.amax()).max(right.amax());
        }
    }

    let u = |x: f64| Vec3::new((PI * x).sin(), (2.0 * x).cos(), x.exp());
    let n = |x: f64| Vec3::new((PI * x).cos(), (3.0 * x).sin(), 1.0 / (1.0 + x));
    let mut rates = Vec::new();
    let mut rates_ok = true;
    for p in 1..=4 {
        let err = |h: f64| {
            let (p1, p2) = hdg_projection(u, n, h, p, 1.0).unwrap();
            let rule = GaussRule::new(p + 12);
            let e1 = h * rule.integrate(|s| (p1.eval(s * h) - u(s * h)).norm_squared());
            let e2 = h * rule.integrate(|s| (p2.eval(s * h) - n(s * h)).norm_squared());
            // per unit length, as on a mesh of 1/h such edges
            ((e1 / h).sqrt(), (e2 / h).sqrt())
        };
        let (a, b) = (err(0.125), err(0.0625));
        let r1 = (a.0 / b.0).log2();
        let r2 = (a.1 / b.1).log2();
        let expect = p as f64 + 1.0;
        rates_ok &= (r1 - expect).abs() <= 0.2 && (r2 - expect).abs() <= 0.2;
        rates.push(format!("p={p}: {r1:.2}/{r2:.2}"));
    }
    check(
        worst_condition <= 1e-11 && rates_ok,
        format!("max condition residual {worst_condition:.2e}; rates (u/n) {}", rates.join(", ")),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 9] = [
        ("AC1", ac1_local_exactness, Duration::from_secs(5)),
        ("AC2", ac2_condensed_block, Duration::from_secs(5)),
        ("AC3", ac3_spd_and_kernel, Duration::from_secs(10)),
        ("AC4", ac4_convergence_rates, Duration::from_secs(120)),
        ("AC5", ac5_p_sweep, Duration::from_secs(60)),
        ("AC6", ac6_uniformity, Duration::from_secs(120)),
        ("AC7", ac7_spectral, Duration::from_secs(60)),
        ("AC8", ac8_solver_oracle, Duration::from_secs(30)),
        ("AC9", ac9_projection, Duration::from_secs(30)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let (mut status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        let mut timing = format!("{:.2}s", elapsed.as_secs_f64());
        if elapsed > budget {
            status = "FAIL";
            timing += &format!(" exceeds budget {}s", budget.as_secs());
        }
        if status == "FAIL" {
            failed += 1;
        }
        println!("{name} {status} [{timing}] {detail}");
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
