use nalgebra::DMatrix;

use super::basis::{legendre_basis, PolyField};
use super::{GaussRule, LocalError};
use crate::Vec3;

/// HDG projection `(Π₁, Π₂)` of a pair `(u, n)` onto degree `p` on `[0, h]`.
///
/// Defined componentwise by `(Π₁ − u, v) = (Π₂ − n, v) = 0` for all `v` of
/// degree `p − 1`, and `Π₂ν + τΠ₁ = nν + τu` at both endpoints
/// (`ν = −1` at `x = 0`, `ν = +1` at `x = h`).
pub fn hdg_projection(
    u: impl Fn(f64) -> Vec3,
    n: impl Fn(f64) -> Vec3,
    length: f64,
    p: usize,
    tau: f64,
) -> Result<(PolyField, PolyField), LocalError> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(LocalError::InvalidTau { edge: usize::MAX, tau });
    }
    let dim = p + 1;
    let rule = GaussRule::new(2 * p + 20);
    let mut a = DMatrix::zeros(2 * dim, 2 * dim);
    let mut rhs = DMatrix::zeros(2 * dim, 3);
    let mut v = vec![0.0; dim];
    let mut d = vec![0.0; dim];

    // moment conditions: orthonormality makes the Gram block the identity
    for i in 0..p {
        a[(i, i)] = 1.0;
        a[(p + i, dim + i)] = 1.0;
    }
    for (s, w) in rule.iter() {
        legendre_basis(p, s, &mut v, &mut d);
        let uu = u(s * length);
        let nn = n(s * length);
        for i in 0..p {
            for c in 0..3 {
                rhs[(i, c)] += w * uu[c] * v[i];
                rhs[(p + i, c)] += w * nn[c] * v[i];
            }
        }
    }

    // endpoint flux conditions
    for (row, s, nu) in [(2 * p, 0.0, -1.0), (2 * p + 1, 1.0, 1.0)] {
        legendre_basis(p, s, &mut v, &mut d);
        for j in 0..dim {
            a[(row, j)] = tau * v[j];
            a[(row, dim + j)] = nu * v[j];
        }
        let x = s * length;
        let target = n(x) * nu + u(x) * tau;
        for c in 0..3 {
            rhs[(row, c)] = target[c];
        }
    }

    let lu = a.lu();
    let sol = lu.solve(&rhs).ok_or(LocalError::ProjectionSingular)?;
    let mut c1 = DMatrix::zeros(3, dim);
    let mut c2 = DMatrix::zeros(3, dim);
    for j in 0..dim {
        for c in 0..3 {
            c1[(c, j)] = sol[(j, c)];
            c2[(c, j)] = sol[(dim + j, c)];
        }
    }
    Ok((
        PolyField::from_coeffs(length, c1),
        PolyField::from_coeffs(length, c2),
    ))
}
