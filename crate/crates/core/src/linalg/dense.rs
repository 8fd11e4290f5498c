//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};

use super::LinalgError;

/// Eigenvalues (ascending) of the symmetric-definite pencil `A x = θ B x`.
pub fn generalized_symmetric_eigenvalues(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<Vec<f64>, LinalgError> {
    let chol = b.clone().cholesky().ok_or(LinalgError::NotPositiveDefinite {
        pivot: 0,
        value: f64::NAN,
    })?;
    let l = chol.l();
    // C = L⁻¹ A L⁻ᵀ
    let y = l
        .solve_lower_triangular(a)
        .ok_or(LinalgError::Singular)?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or(LinalgError::Singular)?;
    let c = (&c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    Ok(ev)
}

/// Eigenvalues (ascending) of a symmetric matrix.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let sym = (a + a.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Indices of a maximal set of linearly independent columns of a symmetric
/// positive semidefinite Gram matrix, found by diagonally pivoted Cholesky.
/// Pivots below `rel_tol * max(diag)` are treated as zero.
pub fn independent_columns(gram: &DMatrix<f64>, rel_tol: f64) -> Vec<usize> {
    let n = gram.nrows();
    let mut a = gram.clone();
    let max_diag = (0..n).map(|i| a[(i, i)]).fold(0.0_f64, f64::max);
    if max_diag <= 0.0 {
        return Vec::new();
    }
    let threshold = rel_tol * max_diag;
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut chosen = Vec::new();
    while !remaining.is_empty() {
        let (pos, &piv) = remaining
            .iter()
            .enumerate()
            .max_by(|(_, &i), (_, &j)| a[(i, i)].total_cmp(&a[(j, j)]).then(j.cmp(&i)))
            .expect("non-empty");
        let d = a[(piv, piv)];
        if d <= threshold {
            break;
        }
        remaining.swap_remove(pos);
        chosen.push(piv);
        // Schur complement update on the remaining indices
        let col: Vec<f64> = remaining.iter().map(|&i| a[(i, piv)]).collect();
        for (ii, &i) in remaining.iter().enumerate() {
            for (jj, &j) in remaining.iter().enumerate() {
                a[(i, j)] -= col[ii] * col[jj] / d;
            }
        }
    }
    chosen.sort_unstable();
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generalized_eigenvalues_of_diagonal_pencil() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 9.0]));
        let b = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 3.0]));
        let ev = generalized_symmetric_eigenvalues(&a, &b).unwrap();
        assert!((ev[0] - 2.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn drops_dependent_columns() {
        // columns: v, 2v, w
        let r = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 1.0, 2.0, 1.0, 0.0, 0.0, 1.0]);
        let g = r.transpose() * &r;
        let cols = independent_columns(&g, 1e-12);
        assert_eq!(cols.len(), 2);
        assert!(cols.contains(&2));
    }
}
