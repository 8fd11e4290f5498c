use std::f64::consts::PI;

use rand::Rng;

use super::VerifyError;
use crate::assembly::DistributedLoads;
use crate::network::{Edge, Network, NodeKind, NodeSpec, EdgeSpec, Material};
use crate::{Mat3, Vec3};

/// Smooth displacement and rotation fields on ℝ³ with their first and second
/// directional derivatives.
pub trait ExactSolution: Sync {
    fn u(&self, x: &Vec3) -> Vec3;
    fn r(&self, x: &Vec3) -> Vec3;
    /// `Du(x)[t]`
    fn du(&self, x: &Vec3, t: &Vec3) -> Vec3;
    /// `D²u(x)[t, t]`
    fn d2u(&self, x: &Vec3, t: &Vec3) -> Vec3;
    fn dr(&self, x: &Vec3, t: &Vec3) -> Vec3;
    fn d2r(&self, x: &Vec3, t: &Vec3) -> Vec3;
}

/// `u = (0, cos πy, cos πx)`, `r = (0, sin πx, sin πy)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CrossSolution;

impl ExactSolution for CrossSolution {
    fn u(&self, x: &Vec3) -> Vec3 {
        Vec3::new(0.0, (PI * x[1]).cos(), (PI * x[0]).cos())
    }

    fn r(&self, x: &Vec3) -> Vec3 {
        Vec3::new(0.0, (PI * x[0]).sin(), (PI * x[1]).sin())
    }

    fn du(&self, x: &Vec3, t: &Vec3) -> Vec3 {
        Vec3::new(0.0, -PI * (PI * x[1]).sin() * t[1], -PI * (PI * x[0]).sin() * t[0])
    }

    fn d2u(&self, x: &Vec3, t: &Vec3) -> Vec3 {
        let pp = PI * PI;
        Vec3::new(0.0, -pp * (PI * x[1]).cos() * t[1] * t[1], -pp * (PI * x[0]).cos() * t[0] * t[0])
    }

    fn dr(&self, x: &Vec3, t: &Vec3) -> Vec3 {
        Vec3::new(0.0, PI * (PI * x[0]).cos() * t[0], PI * (PI * x[1]).cos() * t[1])
    }

    fn d2r(&self, x: &Vec3, t: &Vec3) -> Vec3 {
        let pp = PI * PI;
        Vec3::new(0.0, -pp * (PI * x[0]).sin() * t[0] * t[0], -pp * (PI * x[1]).sin() * t[1] * t[1])
    }
}

/// Infinitesimal rigid motion `u = a + ω × (x − c)`, `r = ω`.
#[derive(Debug, Clone, Copy)]
pub struct RigidMotion {
    pub translation: Vec3,
    pub rotation: Vec3,
    pub center: Vec3,
}

impl ExactSolution for RigidMotion {
    fn u(&self, x: &Vec3) -> Vec3 {
        self.translation + self.rotation.cross(&(x - self.center))
    }

    fn r(&self, _x: &Vec3) -> Vec3 {
        self.rotation
    }

    fn du(&self, _x: &Vec3, t: &Vec3) -> Vec3 {
        self.rotation.cross(t)
    }

    fn d2u(&self, _x: &Vec3, _t: &Vec3) -> Vec3 {
        Vec3::zeros()
    }

    fn dr(&self, _x: &Vec3, _t: &Vec3) -> Vec3 {
        Vec3::zeros()
    }

    fn d2r(&self, _x: &Vec3, _t: &Vec3) -> Vec3 {
        Vec3::zeros()
    }
}

/// Exact fields and sources restricted to one edge, as functions of the arc
/// length from the edge's first node.
pub struct EdgeFields<'a, S: ExactSolution + ?Sized> {
    exact: &'a S,
    edge: &'a Edge,
    cn: Mat3,
    cm: Mat3,
}

impl<'a, S: ExactSolution + ?Sized> EdgeFields<'a, S> {
    pub fn new(exact: &'a S, edge: &'a Edge) -> Self {
        Self {
            exact,
            edge,
            cn: edge.force_stiffness(),
            cm: edge.moment_stiffness(),
        }
    }

    pub fn u(&self, x: f64) -> Vec3 {
        self.exact.u(&self.edge.point(x))
    }

    pub fn r(&self, x: f64) -> Vec3 {
        self.exact.r(&self.edge.point(x))
    }

    /// `n = −C_n(∂ₓu + t × r)`
    pub fn n(&self, x: f64) -> Vec3 {
        let p = self.edge.point(x);
        let t = &self.edge.tangent;
        -(self.cn * (self.exact.du(&p, t) + t.cross(&self.exact.r(&p))))
    }

    /// `m = −C_m ∂ₓr`
    pub fn m(&self, x: f64) -> Vec3 {
        let p = self.edge.point(x);
        -(self.cm * self.exact.dr(&p, &self.edge.tangent))
    }

    /// `f = ∂ₓn = −C_n(∂ₓ²u + t × ∂ₓr)`
    pub fn f(&self, x: f64) -> Vec3 {
        let p = self.edge.point(x);
        let t = &self.edge.tangent;
        -(self.cn * (self.exact.d2u(&p, t) + t.cross(&self.exact.dr(&p, t))))
    }

    /// `g = ∂ₓm + t × n = −C_m ∂ₓ²r + t × n`
    pub fn g(&self, x: f64) -> Vec3 {
        let p = self.edge.point(x);
        let t = &self.edge.tangent;
        -(self.cm * self.exact.d2r(&p, t)) + t.cross(&self.n(x))
    }
}

/// Check the closed-form edge fields against central differences
/// (step `1e-5`) at five random interior points.
pub fn validate_sources<S: ExactSolution + ?Sized>(
    exact: &S,
    edge: &Edge,
    rng: &mut impl Rng,
) -> Result<(), VerifyError> {
    let fields = EdgeFields::new(exact, edge);
    let t = edge.tangent;
    let eps = 1e-5;
    let h = edge.length;
    let diff = |f: &dyn Fn(f64) -> Vec3, x: f64| (f(x + eps) - f(x - eps)) / (2.0 * eps);
    for _ in 0..5 {
        let x = rng.random_range(0.1 * h..0.9 * h);
        let checks: [(&'static str, Vec3, Vec3); 4] = [
            ("n", fields.n(x), -(fields.cn * (diff(&|y| fields.u(y), x) + t.cross(&fields.r(x))))),
            ("m", fields.m(x), -(fields.cm * diff(&|y| fields.r(y), x))),
            ("f", fields.f(x), diff(&|y| fields.n(y), x)),
            ("g", fields.g(x), diff(&|y| fields.m(y), x) + t.cross(&fields.n(x))),
        ];
        for (quantity, closed, fd) in checks {
            let deviation = (closed - fd).amax();
            if deviation > 1e-6 * closed.amax().max(1.0) {
                return Err(VerifyError::SourceValidation {
                    edge: edge.id,
                    quantity,
                    deviation,
                });
            }
        }
    }
    Ok(())
}

/// Distributed loads `f_e`, `g_e` generated by an exact solution.
pub struct ManufacturedLoads<'a, S: ExactSolution + ?Sized>(pub &'a S);

impl<S: ExactSolution + ?Sized> DistributedLoads for ManufacturedLoads<'_, S> {
    fn force(&self, edge: &Edge, x: f64) -> Vec3 {
        EdgeFields::new(self.0, edge).f(x)
    }

    fn moment(&self, edge: &Edge, x: f64) -> Vec3 {
        EdgeFields::new(self.0, edge).g(x)
    }
}

/// Copy of `net` whose Dirichlet nodes carry the exact `(u, r)` and whose free
/// nodes carry the point loads `f_𝔫 = Σ_e n_e ν_e`, `g_𝔫 = Σ_e m_e ν_e` that
/// make the exact solution balanced.
pub fn manufactured_network<S: ExactSolution + ?Sized>(
    net: &Network,
    exact: &S,
) -> Result<Network, VerifyError> {
    let kinds: Vec<NodeKind> = net
        .nodes()
        .iter()
        .map(|node| {
            if node.kind.is_dirichlet() {
                NodeKind::Dirichlet {
                    displacement: exact.u(&node.position),
                    rotation: exact.r(&node.position),
                }
            } else {
                let mut force = Vec3::zeros();
                let mut moment = Vec3::zeros();
                for inc in net.incidences(node.id) {
                    let edge = net.edge(inc.edge);
                    let fields = EdgeFields::new(exact, edge);
                    let x = inc.endpoint as f64 * edge.length;
                    force += fields.n(x) * inc.normal;
                    moment += fields.m(x) * inc.normal;
                }
                NodeKind::Free { force, moment }
            }
        })
        .collect();
    Ok(net.with_node_kinds(&kinds)?)
}

/// Four unit edges meeting at the origin in the plane `z = 0`, clamped at the
/// tips (nodes 0–3), with unit material.
pub fn cross_network() -> Network {
    let tips = [
        Vec3::new(-1.0, 0.0, 0.0),
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.0, -1.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
    ];
    let mut nodes: Vec<NodeSpec> = tips
        .iter()
        .map(|&position| NodeSpec {
            position,
            kind: NodeKind::clamped(),
        })
        .collect();
    nodes.push(NodeSpec {
        position: Vec3::zeros(),
        kind: NodeKind::free(),
    });
    let edges = (0..4)
        .map(|i| EdgeSpec {
            nodes: [i, 4],
            material: Material::UNIT,
            frame_hint: None,
        })
        .collect();
    Network::new(nodes, edges).expect("cross network is valid")
}
