//! Direct factorizations backed by faer.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::{Mat, Side};

use super::sparse::CsrMatrix;
use crate::{Error, Result};

/// Sparse Cholesky factorization of an SPD matrix.
pub struct SparseCholesky {
    n: usize,
    llt: Llt<usize, f64>,
}

impl SparseCholesky {
    pub fn new(a: &CsrMatrix, label: &str) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Factorization {
                block: label.to_string(),
                reason: "matrix is not square".into(),
            });
        }
        let llt = a.to_faer().sp_cholesky(Side::Lower).map_err(|e| Error::Factorization {
            block: label.to_string(),
            reason: format!("{e:?}"),
        })?;
        Ok(Self { n: a.nrows(), llt })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        self.llt.solve_in_place(rhs.as_mut());
        (0..self.n).map(|i| rhs[(i, 0)]).collect()
    }

    /// Solves for several right-hand sides stored as columns.
    pub fn solve_many(&self, b: &Mat<f64>) -> Mat<f64> {
        let mut rhs = b.clone();
        self.llt.solve_in_place(rhs.as_mut());
        rhs
    }
}

/// Sparse LU factorization with partial pivoting, for the indefinite
/// monolithic system.
pub struct SparseLu {
    n: usize,
    lu: Lu<usize, f64>,
}

impl SparseLu {
    pub fn new(a: &CsrMatrix, label: &str) -> Result<Self> {
        let lu = a.to_faer().sp_lu().map_err(|e| Error::Factorization {
            block: label.to_string(),
            reason: format!("{e:?}"),
        })?;
        Ok(Self { n: a.nrows(), lu })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place(rhs.as_mut());
        (0..self.n).map(|i| rhs[(i, 0)]).collect()
    }
}

/// Dense lower Cholesky factor `L` with `M = L Lᵀ`.
pub fn dense_cholesky(m: &Mat<f64>) -> Result<Mat<f64>> {
    let llt = m.llt(Side::Lower).map_err(|e| Error::NotSpd(format!("dense Cholesky failed: {e:?}")))?;
    Ok(llt.L().to_owned())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn cholesky_and_lu_solve_agree() {
        let a = laplace_1d(40);
        let b: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let x1 = SparseCholesky::new(&a, "test").unwrap().solve(&b);
        let x2 = SparseLu::new(&a, "test").unwrap().solve(&b);
        let r = a.mul_vec(&x1);
        for i in 0..40 {
            assert!((r[i] - b[i]).abs() < 1e-12);
            assert!((x1[i] - x2[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(SparseCholesky::new(&a, "indef").is_err());
    }

    #[test]
    fn dense_cholesky_round_trip() {
        let a = laplace_1d(25).to_dense();
        let l = dense_cholesky(&a).unwrap();
        let llt = &l * l.transpose();
        let mut err = 0.0f64;
        let mut norm = 0.0f64;
        for i in 0..25 {
            for j in 0..25 {
                err = err.max((llt[(i, j)] - a[(i, j)]).abs());
                norm = norm.max(a[(i, j)].abs());
            }
        }
        assert!(err <= 1e-12 * norm);
    }
}
