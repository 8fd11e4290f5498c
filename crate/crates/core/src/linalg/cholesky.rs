use super::{reverse_cuthill_mckee, CsrMatrix, LinalgError};

/// Envelope (profile) Cholesky factorization `P A Pᵀ = L Lᵀ` with a reverse
/// Cuthill–McKee permutation.
///
/// Beam networks have small bandwidth after RCM, so the envelope stays close
/// to the true fill.
#[derive(Debug, Clone)]
pub struct SparseCholesky {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    /// first stored column of each row of `L`
    first: Vec<usize>,
    /// offset of `L[i][first[i]]` in `data`
    start: Vec<usize>,
    data: Vec<f64>,
}

impl SparseCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self, LinalgError> {
        if a.nrows() != a.ncols() {
            return Err(LinalgError::NotSquare {
                nrows: a.nrows(),
                ncols: a.ncols(),
            });
        }
        let n = a.nrows();
        let perm = reverse_cuthill_mckee(&a.adjacency());
        let mut iperm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }

        let mut first = vec![0; n];
        for i in 0..n {
            let (cols, _) = a.row(perm[i]);
            first[i] = cols
                .iter()
                .map(|&c| iperm[c])
                .filter(|&c| c <= i)
                .min()
                .unwrap_or(i)
                .min(i);
        }
        let mut start = vec![0; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            let (cols, vals) = a.row(perm[i]);
            for (&c, &v) in cols.iter().zip(vals) {
                let j = iperm[c];
                if j <= i {
                    data[start[i] + j - first[i]] += v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut s = data[start[i] + j - fi];
                let row_i = &data[start[i] + lo - fi..start[i] + j - fi];
                let row_j = &data[start[j] + lo - fj..start[j] + j - fj];
                s -= row_i.iter().zip(row_j).map(|(x, y)| x * y).sum::<f64>();
                if j < i {
                    data[start[i] + j - fi] = s / data[start[j] + j - fj];
                } else {
                    if !(s > 0.0) {
                        return Err(LinalgError::NotPositiveDefinite {
                            pivot: perm[i],
                            value: s,
                        });
                    }
                    data[start[i] + i - fi] = s.sqrt();
                }
            }
        }

        Ok(Self {
            n,
            perm,
            first,
            start,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        // L y = b
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        // Lᵀ x = y
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let xi = y[i];
            for (k, l) in (fi..i).zip(&row[..i - fi]) {
                y[k] -= l * xi;
            }
        }
        let mut x = vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn laplacian_path(n: usize, shift: f64) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + shift));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn solves_against_dense() {
        let mut d = DMatrix::<f64>::zeros(7, 7);
        for i in 0..7 {
            for j in 0..7 {
                d[(i, j)] = 1.0 / (1.0 + (i as f64 - j as f64).abs());
            }
            d[(i, i)] += 3.0;
        }
        let a = CsrMatrix::from_dense(&d);
        let chol = SparseCholesky::factor(&a).unwrap();
        let b: Vec<f64> = (0..7).map(|i| (i as f64).sin()).collect();
        let x = chol.solve(&b);
        let expect = d.cholesky().unwrap().solve(&DVector::from_column_slice(&b));
        for i in 0..7 {
            assert!((x[i] - expect[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn path_has_band_envelope() {
        let a = laplacian_path(50, 0.1);
        let chol = SparseCholesky::factor(&a).unwrap();
        assert!(chol.envelope_size() <= 2 * 50);
        let b = vec![1.0; 50];
        let x = chol.solve(&b);
        let r = a.mul_vec(&x).unwrap();
        for v in r {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(matches!(
            SparseCholesky::factor(&a),
            Err(LinalgError::NotPositiveDefinite { .. })
        ));
    }
}
