use super::{Block12, LocalSolution, PolyField, Vec12};
use crate::network::Edge;
use crate::{Mat3, Vec3};

fn cross_i(v: &Vec3) -> Vec3 {
    Vec3::new(0.0, -v[2], v[1])
}

/// Closed-form solution of the constant-coefficient local beam problem with
/// prescribed endpoint displacements and rotations and no distributed loads.
///
/// Internally everything lives in the edge frame; evaluation returns global
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticBeam {
    length: f64,
    frame: Mat3,
    cn: Vec3,
    cm: Vec3,
    lambda1: Vec3,
    phi1: Vec3,
    c: Vec3,
    d: Vec3,
}

impl AnalyticBeam {
    /// `hybrid = [λ₁, φ₁, λ₂, φ₂]` in global coordinates.
    pub fn new(edge: &Edge, hybrid: &Vec12) -> Self {
        let h = edge.length;
        let tt = edge.frame.transpose();
        let part = |k: usize| tt * Vec3::new(hybrid[3 * k], hybrid[3 * k + 1], hybrid[3 * k + 2]);
        let (lambda1, phi1, lambda2, phi2) = (part(0), part(1), part(2), part(3));
        let cn = edge.material.force_stiffness();
        let cm = edge.material.moment_stiffness();
        let dinv = Vec3::new(
            1.0,
            1.0 / (1.0 + h * h / 12.0 * cn[1] / cm[2]),
            1.0 / (1.0 + h * h / 12.0 * cn[2] / cm[1]),
        );
        let lam_d = lambda2 - lambda1;
        let phi_d = phi2 - phi1;
        let phi_s = phi1 + phi2;
        let a = dinv.component_mul(&cn.component_mul(&lam_d));
        let b = dinv.component_mul(&cn.component_mul(&cross_i(&phi_s)));
        let c = a / h + b * 0.5;
        let d = cm.component_mul(&phi_d) / h + cross_i(&a) * 0.5 + cross_i(&b) * (h / 4.0);
        Self {
            length: h,
            frame: edge.frame,
            cn,
            cm,
            lambda1,
            phi1,
            c,
            d,
        }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    fn local_u(&self, x: f64) -> Vec3 {
        let ic = cross_i(&self.c);
        let a = cross_i(&ic.component_div(&self.cm));
        let b = cross_i(&self.d.component_div(&self.cm));
        a * (x * x * x / 6.0) - b * (0.5 * x * x) - cross_i(&self.phi1) * x
            + self.c.component_div(&self.cn) * x
            + self.lambda1
    }

    fn local_r(&self, x: f64) -> Vec3 {
        let ic = cross_i(&self.c);
        -ic.component_div(&self.cm) * (0.5 * x * x) + self.d.component_div(&self.cm) * x + self.phi1
    }

    fn local_n(&self, _x: f64) -> Vec3 {
        -self.c
    }

    fn local_m(&self, x: f64) -> Vec3 {
        cross_i(&self.c) * x - self.d
    }

    pub fn u(&self, x: f64) -> Vec3 {
        self.frame * self.local_u(x)
    }

    pub fn r(&self, x: f64) -> Vec3 {
        self.frame * self.local_r(x)
    }

    pub fn n(&self, x: f64) -> Vec3 {
        self.frame * self.local_n(x)
    }

    pub fn m(&self, x: f64) -> Vec3 {
        self.frame * self.local_m(x)
    }

    /// Endpoint fluxes `[−n(0), −m(0), n(h), m(h)]` in global coordinates.
    pub fn flux_traces(&self) -> Vec12 {
        let h = self.length;
        let mut t = Vec12::zeros();
        for (b, v) in [-self.n(0.0), -self.m(0.0), self.n(h), self.m(h)].iter().enumerate() {
            t.fixed_rows_mut::<3>(3 * b).copy_from(v);
        }
        t
    }

    /// `∫ C_n⁻¹ n·n + C_m⁻¹ m·m` over the edge.
    pub fn energy(&self) -> f64 {
        let h = self.length;
        let rule = super::GaussRule::new(3);
        h * rule.integrate(|s| {
            let x = s * h;
            let n = self.local_n(x);
            let m = self.local_m(x);
            n.component_div(&self.cn).dot(&n) + m.component_div(&self.cm).dot(&m)
        })
    }
}

/// Closed-form local solution represented exactly in the degree-3 basis.
pub fn analytic_local_solution(edge: &Edge, hybrid: &Vec12) -> LocalSolution {
    let beam = AnalyticBeam::new(edge, hybrid);
    let h = edge.length;
    LocalSolution {
        u: PolyField::project(3, h, 6, |x| beam.u(x)),
        r: PolyField::project(3, h, 6, |x| beam.r(x)),
        n: PolyField::project(3, h, 6, |x| beam.n(x)),
        m: PolyField::project(3, h, 6, |x| beam.m(x)),
    }
}

/// Exact condensed block: column `j` is minus the endpoint fluxes of the
/// analytic solution for unit hybrid data `j`.
pub fn analytic_flux_block(edge: &Edge) -> Block12 {
    let mut k = Block12::zeros();
    for j in 0..12 {
        let mut e = Vec12::zeros();
        e[j] = 1.0;
        let t = AnalyticBeam::new(edge, &e).flux_traces();
        k.set_column(j, &(-t));
    }
    (k + k.transpose()) * 0.5
}
