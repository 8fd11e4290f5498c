#![allow(dead_code)]

use std::path::PathBuf;

use beamnet::network::{EdgeSpec, Material, Network, NodeKind, NodeSpec};
use beamnet::Vec3;
use rand::rngs::StdRng;
use rand::Rng;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn random_vec(rng: &mut StdRng, scale: f64) -> Vec3 {
    Vec3::new(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

pub fn random_material(rng: &mut StdRng) -> Material {
    let mut m = || rng.random_range(0.5..5.0);
    Material::new(m(), m(), m(), m(), m(), m())
}

/// Two-node network holding one random straight edge; node 0 is clamped.
pub fn random_single_edge(rng: &mut StdRng, material: Material) -> Network {
    let a = random_vec(rng, 2.0);
    let dir = loop {
        let d = random_vec(rng, 1.0);
        if d.norm() > 0.2 {
            break d.normalize();
        }
    };
    let h = rng.random_range(0.1..3.0);
    Network::new(
        vec![
            NodeSpec { position: a, kind: NodeKind::clamped() },
            NodeSpec { position: a + dir * h, kind: NodeKind::free() },
        ],
        vec![EdgeSpec { nodes: [0, 1], material, frame_hint: None }],
    )
    .unwrap()
}

/// Connected random network: a random spanning tree plus `extra` chords.
/// Node 0 is clamped, free nodes get random point loads.
pub fn random_network(rng: &mut StdRng, nodes: usize, extra: usize) -> Network {
    let specs: Vec<NodeSpec> = (0..nodes)
        .map(|i| NodeSpec {
            position: random_vec(rng, 1.0),
            kind: if i == 0 {
                NodeKind::clamped()
            } else {
                NodeKind::Free { force: random_vec(rng, 1.0), moment: random_vec(rng, 1.0) }
            },
        })
        .collect();
    let mut pairs: Vec<[usize; 2]> = (1..nodes).map(|i| [rng.random_range(0..i), i]).collect();
    let target = (nodes - 1 + extra).min(nodes * (nodes - 1) / 2);
    while pairs.len() < target {
        let a = rng.random_range(0..nodes);
        let b = rng.random_range(0..nodes);
        let pair = [a.min(b), a.max(b)];
        if a != b && !pairs.contains(&pair) {
            pairs.push(pair);
        }
    }
    let edges = pairs
        .into_iter()
        .map(|nodes| EdgeSpec { nodes, material: random_material(rng), frame_hint: None })
        .collect();
    Network::new(specs, edges).unwrap()
}

/// Valid network files shipped with the tests.
pub fn corpus() -> Vec<(String, Network)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(data_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| {
            let name = p.file_name().unwrap().to_string_lossy();
            name.ends_with(".json") && !name.starts_with("invalid")
        })
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                beamnet::network::parse_network(&text).unwrap(),
            )
        })
        .collect()
}
