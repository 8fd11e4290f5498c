//! Beam network data model: nodes, edges with local frames and materials,
//! JSON ingestion, uniform refinement and graph-Laplacian diagnostics.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, CsrMatrix, LinalgError, SparseCholesky, TripletBuilder};
use crate::{Mat3, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{entity}: {message}")]
    Invalid { entity: String, message: String },
    #[error("edge {edge} is a self-loop on node {node}")]
    SelfLoop { edge: usize, node: usize },
    #[error("edge {edge} references node {node}, but the network has {count} nodes")]
    NodeOutOfRange { edge: usize, node: usize, count: usize },
    #[error("edge {edge}: {source}")]
    Frame {
        edge: usize,
        #[source]
        source: FrameError,
    },
    #[error("edge {edge}: material parameter {name} must be positive and finite, got {value}")]
    NonPositiveMaterial {
        edge: usize,
        name: &'static str,
        value: f64,
    },
    #[error("network is disconnected: node {node} is unreachable from node 0")]
    Disconnected { node: usize },
    #[error("network has no Dirichlet node")]
    NoDirichlet,
    #[error("network has no nodes")]
    Empty,
    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    EigenNotConverged { iterations: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum FrameError {
    #[error("endpoints coincide")]
    CoincidentEndpoints,
    #[error("frame hint is parallel to the edge tangent")]
    HintParallel,
}

/// Diagonal local stiffness of a beam cross section.
///
/// `Ĉ_n = diag(EA, kGA₂, kGA₃)` and `Ĉ_m = diag(GIₜ, EI₂, EI₃)` in the edge
/// frame `(i, j, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    #[serde(rename = "EA")]
    pub ea: f64,
    #[serde(rename = "kGA2")]
    pub kga2: f64,
    #[serde(rename = "kGA3")]
    pub kga3: f64,
    #[serde(rename = "GIt")]
    pub git: f64,
    #[serde(rename = "EI2")]
    pub ei2: f64,
    #[serde(rename = "EI3")]
    pub ei3: f64,
}

impl Material {
    pub const UNIT: Material = Material {
        ea: 1.0,
        kga2: 1.0,
        kga3: 1.0,
        git: 1.0,
        ei2: 1.0,
        ei3: 1.0,
    };

    pub fn new(ea: f64, kga2: f64, kga3: f64, git: f64, ei2: f64, ei3: f64) -> Self {
        Self {
            ea,
            kga2,
            kga3,
            git,
            ei2,
            ei3,
        }
    }

    /// Diagonal of the local force stiffness `Ĉ_n`.
    pub fn force_stiffness(&self) -> Vec3 {
        Vec3::new(self.ea, self.kga2, self.kga3)
    }

    /// Diagonal of the local moment stiffness `Ĉ_m`.
    pub fn moment_stiffness(&self) -> Vec3 {
        Vec3::new(self.git, self.ei2, self.ei3)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            ea: self.ea * factor,
            kga2: self.kga2 * factor,
            kga3: self.kga3 * factor,
            git: self.git * factor,
            ei2: self.ei2 * factor,
            ei3: self.ei3 * factor,
        }
    }

    fn named(&self) -> [(&'static str, f64); 6] {
        [
            ("EA", self.ea),
            ("kGA2", self.kga2),
            ("kGA3", self.kga3),
            ("GIt", self.git),
            ("EI2", self.ei2),
            ("EI3", self.ei3),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind {
    Free { force: Vec3, moment: Vec3 },
    Dirichlet { displacement: Vec3, rotation: Vec3 },
}

impl NodeKind {
    pub fn free() -> Self {
        NodeKind::Free {
            force: Vec3::zeros(),
            moment: Vec3::zeros(),
        }
    }

    pub fn clamped() -> Self {
        NodeKind::Dirichlet {
            displacement: Vec3::zeros(),
            rotation: Vec3::zeros(),
        }
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self, NodeKind::Dirichlet { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: usize,
    pub position: Vec3,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: usize,
    /// Endpoints `(k, ℓ)` with `k < ℓ`.
    pub nodes: [usize; 2],
    /// Position of node `k`; arc length is measured from here.
    pub origin: Vec3,
    pub length: f64,
    /// Unit tangent from node `k` toward node `ℓ`.
    pub tangent: Vec3,
    /// Orthonormal right-handed frame with the tangent as first column.
    pub frame: Mat3,
    pub material: Material,
    pub frame_hint: Option<Vec3>,
}

impl Edge {
    /// Point at arc length `x` along the edge.
    pub fn point(&self, x: f64) -> Vec3 {
        self.origin + self.tangent * x
    }

    /// Global force stiffness `C_n = T Ĉ_n Tᵀ`.
    pub fn force_stiffness(&self) -> Mat3 {
        self.frame * Mat3::from_diagonal(&self.material.force_stiffness()) * self.frame.transpose()
    }

    /// Global moment stiffness `C_m = T Ĉ_m Tᵀ`.
    pub fn moment_stiffness(&self) -> Mat3 {
        self.frame * Mat3::from_diagonal(&self.material.moment_stiffness()) * self.frame.transpose()
    }
}

/// One edge incident to a node, with the scalar normal `ν_e(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incidence {
    pub edge: usize,
    /// 0 for the edge's first endpoint, 1 for the second.
    pub endpoint: usize,
    /// −1 at the first endpoint, +1 at the second.
    pub normal: f64,
}

/// Input description of a node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub position: Vec3,
    pub kind: NodeKind,
}

/// Input description of an edge; endpoints may come in either order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub nodes: [usize; 2],
    pub material: Material,
    pub frame_hint: Option<Vec3>,
}

/// Validated, immutable beam network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<Incidence>>,
}

/// Local frame of an edge from `p_k` to `p_l`.
///
/// The first column is the unit tangent. With a hint the second column is the
/// hint orthonormalized against the tangent; otherwise it is the global axis
/// least aligned with the tangent (lowest index on ties), orthonormalized.
pub fn build_frame(p_k: &Vec3, p_l: &Vec3, hint_j: Option<&Vec3>) -> Result<Mat3, FrameError> {
    let d = p_l - p_k;
    let len = d.norm();
    if !(len > 0.0) || len <= 1e-14 * p_k.norm().max(p_l.norm()) {
        return Err(FrameError::CoincidentEndpoints);
    }
    let i = d / len;
    let j = match hint_j {
        Some(h) => {
            let proj = h - i * h.dot(&i);
            let n = proj.norm();
            if !(n > 1e-12 * h.norm()) {
                return Err(FrameError::HintParallel);
            }
            proj / n
        }
        None => {
            let mut axis = 0;
            for a in 1..3 {
                if i[a].abs() < i[axis].abs() {
                    axis = a;
                }
            }
            let mut e = Vec3::zeros();
            e[axis] = 1.0;
            let proj = e - i * e.dot(&i);
            proj / proj.norm()
        }
    };
    let k = i.cross(&j);
    Ok(Mat3::from_columns(&[i, j, k]))
}

impl Network {
    /// Validate and build a network.
    pub fn new(nodes: Vec<NodeSpec>, edges: Vec<EdgeSpec>) -> Result<Self, NetworkError> {
        if nodes.is_empty() {
            return Err(NetworkError::Empty);
        }
        for (id, n) in nodes.iter().enumerate() {
            let finite = n.position.iter().all(|v| v.is_finite())
                && match n.kind {
                    NodeKind::Free { force, moment } => {
                        force.iter().chain(moment.iter()).all(|v| v.is_finite())
                    }
                    NodeKind::Dirichlet {
                        displacement,
                        rotation,
                    } => displacement.iter().chain(rotation.iter()).all(|v| v.is_finite()),
                };
            if !finite {
                return Err(NetworkError::Invalid {
                    entity: format!("node {id}"),
                    message: "non-finite value".into(),
                });
            }
        }
        let nodes: Vec<Node> = nodes
            .into_iter()
            .enumerate()
            .map(|(id, n)| Node {
                id,
                position: n.position,
                kind: n.kind,
            })
            .collect();

        let mut built = Vec::with_capacity(edges.len());
        for (id, spec) in edges.into_iter().enumerate() {
            for &node in &spec.nodes {
                if node >= nodes.len() {
                    return Err(NetworkError::NodeOutOfRange {
                        edge: id,
                        node,
                        count: nodes.len(),
                    });
                }
            }
            if spec.nodes[0] == spec.nodes[1] {
                return Err(NetworkError::SelfLoop {
                    edge: id,
                    node: spec.nodes[0],
                });
            }
            for (name, value) in spec.material.named() {
                if !(value > 0.0) || !value.is_finite() {
                    return Err(NetworkError::NonPositiveMaterial {
                        edge: id,
                        name,
                        value,
                    });
                }
            }
            let k = spec.nodes[0].min(spec.nodes[1]);
            let l = spec.nodes[0].max(spec.nodes[1]);
            let (pk, pl) = (nodes[k].position, nodes[l].position);
            let frame = build_frame(&pk, &pl, spec.frame_hint.as_ref())
                .map_err(|source| NetworkError::Frame { edge: id, source })?;
            built.push(Edge {
                id,
                nodes: [k, l],
                origin: pk,
                length: (pl - pk).norm(),
                tangent: frame.column(0).into_owned(),
                frame,
                material: spec.material,
                frame_hint: spec.frame_hint,
            });
        }

        let mut adjacency = vec![Vec::new(); nodes.len()];
        for e in &built {
            adjacency[e.nodes[0]].push(Incidence {
                edge: e.id,
                endpoint: 0,
                normal: -1.0,
            });
            adjacency[e.nodes[1]].push(Incidence {
                edge: e.id,
                endpoint: 1,
                normal: 1.0,
            });
        }

        let net = Self {
            nodes,
            edges: built,
            adjacency,
        };
        if let Some(node) = net.first_unreachable() {
            return Err(NetworkError::Disconnected { node });
        }
        if net.dirichlet_count() == 0 {
            return Err(NetworkError::NoDirichlet);
        }
        Ok(net)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    /// Incident edges of node `id`.
    pub fn incidences(&self, id: usize) -> &[Incidence] {
        &self.adjacency[id]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn dirichlet_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind.is_dirichlet()).count()
    }

    pub fn dirichlet_mask(&self) -> Vec<bool> {
        self.nodes.iter().map(|n| n.kind.is_dirichlet()).collect()
    }

    pub fn h_min(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min)
    }

    pub fn h_max(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(0.0, f64::max)
    }

    /// Axis-aligned bounding box of the node positions.
    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for n in &self.nodes {
            lo = lo.inf(&n.position);
            hi = hi.sup(&n.position);
        }
        (lo, hi)
    }

    fn first_unreachable(&self) -> Option<usize> {
        let mut seen = vec![false; self.nodes.len()];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for inc in &self.adjacency[v] {
                let e = &self.edges[inc.edge];
                let w = e.nodes[1 - inc.endpoint];
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    pub fn node_specs(&self) -> Vec<NodeSpec> {
        self.nodes
            .iter()
            .map(|n| NodeSpec {
                position: n.position,
                kind: n.kind,
            })
            .collect()
    }

    pub fn edge_specs(&self) -> Vec<EdgeSpec> {
        self.edges
            .iter()
            .map(|e| EdgeSpec {
                nodes: e.nodes,
                material: e.material,
                frame_hint: e.frame_hint,
            })
            .collect()
    }

    /// Copy of the network with node data replaced.
    pub fn with_node_kinds(&self, kinds: &[NodeKind]) -> Result<Self, NetworkError> {
        assert_eq!(kinds.len(), self.nodes.len());
        let mut net = self.clone();
        for (n, k) in net.nodes.iter_mut().zip(kinds) {
            n.kind = *k;
        }
        if net.dirichlet_count() == 0 {
            return Err(NetworkError::NoDirichlet);
        }
        Ok(net)
    }

    /// Copy of the network with every edge material replaced by `f(edge)`.
    pub fn map_materials(&self, f: impl Fn(&Edge) -> Material) -> Result<Self, NetworkError> {
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeSpec {
                nodes: e.nodes,
                material: f(e),
                frame_hint: e.frame_hint,
            })
            .collect();
        Network::new(self.node_specs(), edges)
    }

    pub fn to_file(&self) -> NetworkFile {
        NetworkFile {
            nodes: self
                .nodes
                .iter()
                .map(|n| {
                    let (dirichlet, force, moment) = match n.kind {
                        NodeKind::Free { force, moment } => (None, Some(force.into()), Some(moment.into())),
                        NodeKind::Dirichlet {
                            displacement,
                            rotation,
                        } => (
                            Some(DirichletFile {
                                u: Some(displacement.into()),
                                r: Some(rotation.into()),
                            }),
                            None,
                            None,
                        ),
                    };
                    NodeFile {
                        pos: n.position.into(),
                        dirichlet,
                        force,
                        moment,
                    }
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeFile {
                    nodes: e.nodes,
                    material: e.material,
                    frame_j: e.frame_hint.map(Into::into),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("network serializes")
    }
}

/// On-disk network description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub nodes: Vec<NodeFile>,
    pub edges: Vec<EdgeFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeFile {
    pub pos: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dirichlet: Option<DirichletFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub force: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletFile {
    #[serde(default)]
    pub u: Option<[f64; 3]>,
    #[serde(default)]
    pub r: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeFile {
    pub nodes: [usize; 2],
    pub material: Material,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_j: Option<[f64; 3]>,
}

impl NetworkFile {
    pub fn into_network(self) -> Result<Network, NetworkError> {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (id, n) in self.nodes.into_iter().enumerate() {
            let kind = match n.dirichlet {
                Some(d) => {
                    if n.force.is_some() || n.moment.is_some() {
                        return Err(NetworkError::Invalid {
                            entity: format!("node {id}"),
                            message: "a Dirichlet node cannot carry point loads".into(),
                        });
                    }
                    NodeKind::Dirichlet {
                        displacement: d.u.map(Vec3::from).unwrap_or_else(Vec3::zeros),
                        rotation: d.r.map(Vec3::from).unwrap_or_else(Vec3::zeros),
                    }
                }
                None => NodeKind::Free {
                    force: n.force.map(Vec3::from).unwrap_or_else(Vec3::zeros),
                    moment: n.moment.map(Vec3::from).unwrap_or_else(Vec3::zeros),
                },
            };
            nodes.push(NodeSpec {
                position: n.pos.into(),
                kind,
            });
        }
        let edges = self
            .edges
            .into_iter()
            .map(|e| EdgeSpec {
                nodes: e.nodes,
                material: e.material,
                frame_hint: e.frame_j.map(Vec3::from),
            })
            .collect();
        Network::new(nodes, edges)
    }
}

/// Parse and validate a network file.
pub fn parse_network(text: &str) -> Result<Network, NetworkError> {
    let file: NetworkFile = serde_json::from_str(text).map_err(|e| NetworkError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.into_network()
}

/// Split every edge into `2^k` equal collinear segments.
///
/// Original nodes keep their ids and data; inserted nodes are free and
/// unloaded and are numbered after the original nodes in edge order.
pub fn refine_uniform(net: &Network, k: u32) -> Network {
    if k == 0 {
        return net.clone();
    }
    let parts = 1usize << k;
    let mut nodes = net.node_specs();
    let mut edges = Vec::with_capacity(net.num_edges() * parts);
    for e in net.edges() {
        let pk = net.node(e.nodes[0]).position;
        let pl = net.node(e.nodes[1]).position;
        let mut chain = Vec::with_capacity(parts + 1);
        chain.push(e.nodes[0]);
        for j in 1..parts {
            let t = j as f64 / parts as f64;
            chain.push(nodes.len());
            nodes.push(NodeSpec {
                position: pk + (pl - pk) * t,
                kind: NodeKind::free(),
            });
        }
        chain.push(e.nodes[1]);
        for w in chain.windows(2) {
            edges.push(EdgeSpec {
                nodes: [w[0], w[1]],
                material: e.material,
                frame_hint: e.frame_hint,
            });
        }
    }
    Network::new(nodes, edges).expect("refinement preserves validity")
}

/// Edge-length weighted graph Laplacian (one scalar component, `K×K`).
pub fn graph_laplacian(net: &Network) -> CsrMatrix {
    let n = net.num_nodes();
    let mut b = TripletBuilder::with_capacity(n, n, 4 * net.num_edges());
    for e in net.edges() {
        let w = 1.0 / e.length;
        let [k, l] = e.nodes;
        b.push(k, k, w);
        b.push(l, l, w);
        b.push(k, l, -w);
        b.push(l, k, -w);
    }
    b.build()
}

/// Lumped mass: `M[n,n] = ½ Σ_{e∼n} h_e`.
pub fn mass_operator(net: &Network) -> Vec<f64> {
    let mut m = vec![0.0; net.num_nodes()];
    for e in net.edges() {
        m[e.nodes[0]] += 0.5 * e.length;
        m[e.nodes[1]] += 0.5 * e.length;
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub rel_tol: f64,
    pub max_iterations: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            max_iterations: 10_000,
        }
    }
}

/// Smallest eigenvalue of `L x = λ M x` restricted to non-Dirichlet nodes,
/// by inverse iteration with Rayleigh-quotient estimates.
///
/// Converged when the `M⁻¹`-weighted residual of the eigenpair is below
/// `rel_tol · λ`.
pub fn lambda_min_estimate(
    laplacian: &CsrMatrix,
    mass: &[f64],
    dirichlet: &[bool],
    opts: &EigenOptions,
) -> Result<f64, NetworkError> {
    let free: Vec<usize> = (0..mass.len()).filter(|&i| !dirichlet[i]).collect();
    if free.is_empty() {
        return Err(NetworkError::Invalid {
            entity: "network".into(),
            message: "no free nodes".into(),
        });
    }
    let l = laplacian.principal_submatrix(&free);
    let m: Vec<f64> = free.iter().map(|&i| mass[i]).collect();
    let chol = SparseCholesky::factor(&l)?;

    let m_norm = |x: &[f64]| x.iter().zip(&m).map(|(v, w)| v * v * w).sum::<f64>().sqrt();
    let mut x = vec![1.0; free.len()];
    let s = m_norm(&x);
    x.iter_mut().for_each(|v| *v /= s);
    for _ in 0..opts.max_iterations {
        let mx: Vec<f64> = x.iter().zip(&m).map(|(v, w)| v * w).collect();
        let mut y = chol.solve(&mx);
        let s = m_norm(&y);
        y.iter_mut().for_each(|v| *v /= s);
        let ly = l.mul_vec(&y)?;
        let theta = linalg::dot(&ly, &y);
        let res = ly
            .iter()
            .zip(&y)
            .zip(&m)
            .map(|((a, v), w)| {
                let r = a - theta * w * v;
                r * r / w
            })
            .sum::<f64>()
            .sqrt();
        x = y;
        if res <= opts.rel_tol * theta {
            return Ok(theta);
        }
    }
    Err(NetworkError::EigenNotConverged {
        iterations: opts.max_iterations,
    })
}
