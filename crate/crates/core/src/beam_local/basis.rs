use nalgebra::DMatrix;

use super::quadrature::GaussRule;
use crate::Vec3;

/// Values and first derivatives of the orthonormal Legendre basis
/// `ψ_i(s) = √(2i+1) P_i(2s − 1)`, `i = 0..=p`, at `s ∈ [0, 1]`.
pub fn legendre_basis(p: usize, s: f64, values: &mut [f64], derivs: &mut [f64]) {
    debug_assert!(values.len() > p && derivs.len() > p);
    let t = 2.0 * s - 1.0;
    // P_i and P_i' on [-1, 1]
    let (mut pm1, mut pc) = (0.0, 1.0);
    let (mut dm1, mut dc) = (0.0, 0.0);
    for i in 0..=p {
        let scale = (2.0 * i as f64 + 1.0).sqrt();
        values[i] = scale * pc;
        derivs[i] = 2.0 * scale * dc;
        let k = i as f64;
        let pn = ((2.0 * k + 1.0) * t * pc - k * pm1) / (k + 1.0);
        let dn = dm1 + (2.0 * k + 1.0) * pc;
        pm1 = pc;
        pc = pn;
        dm1 = dc;
        dc = dn;
    }
}

/// Polynomial space `(P_p)³` on an edge, with the reference-interval data
/// the local solver needs.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialSpace {
    degree: usize,
    quadrature: GaussRule,
    load_quadrature: GaussRule,
    /// `S[(j, i)] = ∫₀¹ ψ_j ψ_i' ds`
    stiffness: DMatrix<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl PolynomialSpace {
    /// Space of degree `p` with the default load rule of `2p + 4` points.
    pub fn new(p: usize) -> Self {
        Self::with_load_points(p, 2 * p + 4)
    }

    pub fn with_load_points(p: usize, load_points: usize) -> Self {
        let n = p + 1;
        let quadrature = GaussRule::new(p + 2);
        let mut stiffness = DMatrix::zeros(n, n);
        let mut v = vec![0.0; n];
        let mut d = vec![0.0; n];
        for (s, w) in quadrature.iter() {
            legendre_basis(p, s, &mut v, &mut d);
            for j in 0..n {
                for i in 0..n {
                    stiffness[(j, i)] += w * v[j] * d[i];
                }
            }
        }
        let left = (0..n)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                sign * (2.0 * i as f64 + 1.0).sqrt()
            })
            .collect();
        let right = (0..n).map(|i| (2.0 * i as f64 + 1.0).sqrt()).collect();
        Self {
            degree: p,
            quadrature,
            load_quadrature: GaussRule::new(load_points.max(1)),
            stiffness,
            left,
            right,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of basis functions per component.
    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    /// Rule used for the bilinear terms (`p + 2` points).
    pub fn quadrature(&self) -> &GaussRule {
        &self.quadrature
    }

    /// Rule used for load integrals.
    pub fn load_quadrature(&self) -> &GaussRule {
        &self.load_quadrature
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    /// `ψ_i(0)`
    pub fn left_values(&self) -> &[f64] {
        &self.left
    }

    /// `ψ_i(1)`
    pub fn right_values(&self) -> &[f64] {
        &self.right
    }

    /// Basis values at reference coordinate `s`.
    pub fn values(&self, s: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        let mut d = vec![0.0; self.dim()];
        legendre_basis(self.degree, s, &mut v, &mut d);
        v
    }
}

/// Vector-valued polynomial `x ↦ Σ_i c_i ψ_i(x / h)` on `[0, h]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyField {
    length: f64,
    /// `3 × (p + 1)`
    coeffs: DMatrix<f64>,
}

impl PolyField {
    pub fn zeros(p: usize, length: f64) -> Self {
        Self {
            length,
            coeffs: DMatrix::zeros(3, p + 1),
        }
    }

    pub fn from_coeffs(length: f64, coeffs: DMatrix<f64>) -> Self {
        assert_eq!(coeffs.nrows(), 3);
        assert!(coeffs.ncols() >= 1);
        Self { length, coeffs }
    }

    /// L2 projection of `f` onto degree `p` using `points` quadrature nodes.
    pub fn project(p: usize, length: f64, points: usize, f: impl Fn(f64) -> Vec3) -> Self {
        let rule = GaussRule::new(points);
        let mut coeffs = DMatrix::zeros(3, p + 1);
        let mut v = vec![0.0; p + 1];
        let mut d = vec![0.0; p + 1];
        for (s, w) in rule.iter() {
            legendre_basis(p, s, &mut v, &mut d);
            let y = f(s * length);
            for i in 0..=p {
                for c in 0..3 {
                    coeffs[(c, i)] += w * v[i] * y[c];
                }
            }
        }
        Self { length, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.ncols() - 1
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.coeffs
    }

    fn basis_at(&self, x: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.coeffs.ncols();
        let mut v = vec![0.0; n];
        let mut d = vec![0.0; n];
        legendre_basis(n - 1, x / self.length, &mut v, &mut d);
        (v, d)
    }

    /// Value at arc length `x ∈ [0, h]`.
    pub fn eval(&self, x: f64) -> Vec3 {
        let (v, _) = self.basis_at(x);
        Vec3::from_iterator((0..3).map(|c| (0..v.len()).map(|i| self.coeffs[(c, i)] * v[i]).sum()))
    }

    /// Derivative with respect to arc length.
    pub fn derivative(&self, x: f64) -> Vec3 {
        let (_, d) = self.basis_at(x);
        Vec3::from_iterator(
            (0..3).map(|c| (0..d.len()).map(|i| self.coeffs[(c, i)] * d[i]).sum::<f64>() / self.length),
        )
    }

    /// Apply a 3×3 linear map to the values.
    pub fn transformed(&self, t: &crate::Mat3) -> Self {
        let t = DMatrix::from_column_slice(3, 3, t.as_slice());
        Self {
            length: self.length,
            coeffs: t * &self.coeffs,
        }
    }

    /// `‖·‖_{L²(0,h)}`, exact thanks to orthonormality.
    pub fn l2_norm(&self) -> f64 {
        (self.coeffs.norm_squared() * self.length).sqrt()
    }
}
