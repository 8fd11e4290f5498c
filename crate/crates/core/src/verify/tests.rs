use rand::rngs::StdRng;
use rand::SeedableRng;

use super::*;
use crate::network::{refine_uniform, EdgeSpec, Material, Network, NodeKind, NodeSpec};
use crate::Vec3;

fn rigid() -> RigidMotion {
    RigidMotion {
        translation: Vec3::new(0.3, -0.2, 0.5),
        rotation: Vec3::new(0.1, 0.4, -0.7),
        center: Vec3::new(0.2, 0.1, 0.0),
    }
}

/// A small spatial frame with mixed materials and a skew member.
fn frame() -> Network {
    let p = [
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(1.0, 1.0, 0.0),
        Vec3::new(0.0, 1.0, 0.5),
        Vec3::new(0.5, 0.5, 1.0),
    ];
    let nodes = p
        .iter()
        .enumerate()
        .map(|(i, &position)| NodeSpec {
            position,
            kind: if i < 2 { NodeKind::clamped() } else { NodeKind::free() },
        })
        .collect();
    let mat = Material::new(3.0, 1.5, 2.0, 0.7, 1.1, 0.9);
    let edges = [[0, 2], [1, 2], [2, 3], [3, 4], [0, 4], [1, 4]]
        .iter()
        .enumerate()
        .map(|(i, &nodes)| EdgeSpec {
            nodes,
            material: if i % 2 == 0 { mat } else { Material::UNIT },
            frame_hint: None,
        })
        .collect();
    Network::new(nodes, edges).unwrap()
}

#[test]
fn closed_form_sources_match_finite_differences() {
    let mut rng = StdRng::seed_from_u64(7);
    for edge in cross_network().edges() {
        validate_sources(&CrossSolution, edge, &mut rng).unwrap();
    }
    for edge in frame().edges() {
        validate_sources(&CrossSolution, edge, &mut rng).unwrap();
        validate_sources(&rigid(), edge, &mut rng).unwrap();
    }
}

#[test]
fn cross_fields_on_positive_x_edge() {
    let net = cross_network();
    // edge from the origin (node 4) to (1,0,0) is stored as [1, 4]
    let edge = net
        .edges()
        .iter()
        .find(|e| e.nodes == [1, 4])
        .unwrap();
    let f = EdgeFields::new(&CrossSolution, edge);
    let pi = std::f64::consts::PI;
    for x in [0.1, 0.4, 0.8] {
        let pos = edge.point(x);
        let expect_u = Vec3::new(0.0, 1.0, (pi * pos[0]).cos());
        assert!((f.u(x) - expect_u).norm() < 1e-14);
        assert!((f.r(x) - Vec3::new(0.0, (pi * pos[0]).sin(), 0.0)).norm() < 1e-14);
    }
}

#[test]
fn cross_sources_on_unit_x_edge_from_origin() {
    let net = Network::new(
        vec![
            NodeSpec { position: Vec3::zeros(), kind: NodeKind::clamped() },
            NodeSpec { position: Vec3::x(), kind: NodeKind::free() },
        ],
        vec![EdgeSpec { nodes: [0, 1], material: Material::UNIT, frame_hint: None }],
    )
    .unwrap();
    let f = EdgeFields::new(&CrossSolution, net.edge(0));
    let pi = std::f64::consts::PI;
    for x in [0.05, 0.3, 0.5, 0.77] {
        let (s, c) = ((pi * x).sin(), (pi * x).cos());
        assert!((f.n(x) - Vec3::new(0.0, 0.0, (pi - 1.0) * s)).norm() < 1e-13);
        assert!((f.f(x) - Vec3::new(0.0, 0.0, pi * (pi - 1.0) * c)).norm() < 1e-12);
        assert!((f.g(x) - Vec3::new(0.0, (pi * pi - pi + 1.0) * s, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn rigid_motion_has_no_sources_or_stresses() {
    let r = rigid();
    for edge in frame().edges() {
        let f = EdgeFields::new(&r, edge);
        for x in [0.0, 0.3 * edge.length, edge.length] {
            assert!(f.n(x).norm() < 1e-14);
            assert!(f.m(x).norm() < 1e-14);
            assert!(f.f(x).norm() < 1e-14);
            assert!(f.g(x).norm() < 1e-14);
        }
    }
}

#[test]
fn rigid_motion_is_reproduced_exactly() {
    let cfg = StudyConfig::new(1, 0, 3);
    for net in [cross_network(), frame()] {
        let run = solve_manufactured(&net, &rigid(), 1, &cfg).unwrap();
        let err = l2_errors(&run.network, &run.solution, &rigid());
        assert!(err.primal < 1e-11, "{err:?}");
        assert!(err.dual < 1e-11, "{err:?}");
    }
}

#[test]
fn manufactured_point_loads_balance_exact_fluxes() {
    let net = manufactured_network(&cross_network(), &CrossSolution).unwrap();
    let centre = net.node(4);
    match centre.kind {
        // the arms cancel pairwise at the origin
        NodeKind::Free { force, moment } => {
            assert!(force.norm() < 1e-12);
            assert!(moment.norm() < 1e-12);
        }
        _ => panic!("centre must stay free"),
    }
    for tip in 0..4 {
        let NodeKind::Dirichlet { displacement, rotation } = net.node(tip).kind else {
            panic!("tips are clamped");
        };
        let p = net.node(tip).position;
        assert_eq!(displacement, CrossSolution.u(&p));
        assert_eq!(rotation, CrossSolution.r(&p));
    }
}

#[test]
fn refined_cross_carries_point_loads() {
    let net = manufactured_network(&refine_uniform(&cross_network(), 1), &CrossSolution).unwrap();
    let mid = net
        .nodes()
        .iter()
        .find(|n| (n.position - Vec3::new(0.5, 0.0, 0.0)).norm() < 1e-14)
        .unwrap();
    let NodeKind::Free { force, moment } = mid.kind else {
        panic!("interior nodes are free");
    };
    // smooth fields: fluxes from both sides cancel at an interior node
    assert!(force.norm() < 1e-12 && moment.norm() < 1e-12);
}

#[test]
fn hybrid_values_at_dirichlet_nodes_are_exact() {
    let cfg = StudyConfig::new(2, 0, 3);
    let run = solve_manufactured(&refine_uniform(&cross_network(), 1), &CrossSolution, 2, &cfg).unwrap();
    for node in run.network.nodes().iter().filter(|n| n.kind.is_dirichlet()) {
        let p = node.position;
        assert!((run.solution.displacement(node.id) - CrossSolution.u(&p)).norm() < 1e-14);
        assert!((run.solution.rotation(node.id) - CrossSolution.r(&p)).norm() < 1e-14);
    }
}

#[test]
fn cross_converges_at_optimal_rate() {
    for (p, s) in [(1, 0), (2, 0), (1, 1), (1, -1)] {
        let cfg = StudyConfig::new(p, s, 5);
        let records = convergence_study(&cfg).unwrap();
        let (primal, dual) = asymptotic_eoc(&records).unwrap();
        let (ep, ed) = expected_rates(p, s);
        assert!((primal - ep).abs() < 0.3, "p={p} s={s}: primal {primal} vs {ep}");
        assert!(dual > ed - 0.3, "p={p} s={s}: dual {dual} vs {ed}");
        for w in records.windows(2) {
            assert!(w[1].h_max < w[0].h_max);
            assert!(w[1].err_primal < w[0].err_primal);
        }
    }
}

#[test]
fn study_rejects_bad_configurations() {
    assert!(matches!(
        convergence_study(&StudyConfig::new(0, 0, 3)),
        Err(VerifyError::InvalidConfig(_))
    ));
    assert!(matches!(
        convergence_study(&StudyConfig::new(1, 0, 2)),
        Err(VerifyError::InvalidConfig(_))
    ));
    assert!(matches!(p_sweep(1, &[0, 1], 0, 1.0), Err(VerifyError::InvalidConfig(_))));
    assert!(matches!(
        convergence_study(&StudyConfig::new(1, 2, 3)),
        Err(VerifyError::InvalidConfig(_))
    ));
}

#[test]
fn p_sweep_errors_decrease() {
    let records = p_sweep(1, &[1, 2, 3, 4], 0, 1.0).unwrap();
    for w in records.windows(2) {
        assert!(w[1].err_primal < 0.5 * w[0].err_primal, "{records:?}");
        assert!(w[1].err_dual < 0.5 * w[0].err_dual, "{records:?}");
    }
}

#[test]
fn asymptotic_eoc_averages_last_two() {
    let rec = |level, eoc: Option<f64>| ConvergenceRecord {
        level,
        h_max: 1.0,
        dofs: 0,
        err_primal: 1.0,
        err_dual: 1.0,
        eoc_primal: eoc,
        eoc_dual: eoc.map(|e| e - 1.0),
    };
    let records = [rec(0, None), rec(1, Some(1.0)), rec(2, Some(2.0)), rec(3, Some(3.0))];
    assert_eq!(asymptotic_eoc(&records), Some((2.5, 1.5)));
    assert_eq!(asymptotic_eoc(&records[..2]), None);
}

#[test]
fn csv_output_round_trips_at_full_precision() {
    let records = vec![
        ConvergenceRecord {
            level: 0,
            h_max: 1.0,
            dofs: 6,
            err_primal: 0.123_456_789_012_345_68,
            err_dual: std::f64::consts::PI,
            eoc_primal: None,
            eoc_dual: None,
        },
        ConvergenceRecord {
            level: 1,
            h_max: 0.5,
            dofs: 30,
            err_primal: 1.0 / 3.0,
            err_dual: 2e-9,
            eoc_primal: Some(2.0000001),
            eoc_dual: Some(1.5),
        },
    ];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("conv.csv");
    write_convergence_csv(&path, &records).unwrap();
    let mut reader = csv::Reader::from_path(&path).unwrap();
    assert_eq!(
        reader.headers().unwrap(),
        vec!["level", "h_max", "err_primal", "err_dual", "eoc_primal", "eoc_dual"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), records[0].err_primal);
    assert_eq!(rows[0][4].len(), 0);
    assert_eq!(rows[1][3].parse::<f64>().unwrap(), 2e-9);
    assert_eq!(rows[1][4].parse::<f64>().unwrap(), 2.0000001);
}
