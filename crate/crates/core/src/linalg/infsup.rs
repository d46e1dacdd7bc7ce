//! Discrete inf-sup constants of saddle-point systems.
//!
//! For `A` SPD on the primal space, a constraint operator `B` and an SPD
//! norm matrix `N` on the multiplier space, `β²` is the smallest nonzero
//! eigenvalue of `B A⁻¹ Bᵀ x = λ N x`.

use faer::Mat;

use super::eigen::{generalized_sym_eigenvalues, DENSE_GUARD};
use super::factor::SparseCholesky;
use super::sparse::CsrMatrix;
use crate::{Error, Result};

/// Eigenvalues below `KERNEL_TOL · λ_max` are treated as kernel modes.
pub const KERNEL_TOL: f64 = 1e-8;

/// Returns `β` together with the dimension of the discarded kernel.
pub fn inf_sup_constant(a: &CsrMatrix, b: &CsrMatrix, n: &CsrMatrix) -> Result<(f64, usize)> {
    let m = b.nrows();
    if b.ncols() != a.nrows() || n.nrows() != m {
        return Err(Error::Eigen("inf-sup operator shapes do not match".into()));
    }
    if m > DENSE_GUARD {
        return Err(Error::SizeGuard { size: m, limit: DENSE_GUARD });
    }
    let chol = SparseCholesky::new(a, "inf-sup primal block")?;
    let bt = b.transpose().to_dense();
    let x = chol.solve_many(&bt);
    let bd = b.to_dense();
    let s: Mat<f64> = &bd * &x;
    let values = generalized_sym_eigenvalues(&s, &n.to_dense())?;
    let max = values.iter().copied().fold(0.0f64, f64::max);
    let kernel = values.iter().filter(|v| **v < KERNEL_TOL * max).count();
    let lo = values
        .iter()
        .copied()
        .find(|v| *v >= KERNEL_TOL * max)
        .ok_or_else(|| Error::Eigen("Schur complement vanishes".into()))?;
    Ok((lo.sqrt(), kernel))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_constraint_gives_one() {
        let a = CsrMatrix::identity(3);
        let b = CsrMatrix::from_dense(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        let (beta, kernel) = inf_sup_constant(&a, &b, &CsrMatrix::identity(2)).unwrap();
        assert!((beta - 1.0).abs() < 1e-14);
        assert_eq!(kernel, 0);
    }

    #[test]
    fn kernel_is_skipped() {
        let a = CsrMatrix::diagonal_matrix(&[4.0, 1.0]);
        // second multiplier row is zero: one kernel mode
        let b = CsrMatrix::from_dense(&[vec![2.0, 0.0], vec![0.0, 0.0]]);
        let (beta, kernel) = inf_sup_constant(&a, &b, &CsrMatrix::identity(2)).unwrap();
        assert_eq!(kernel, 1);
        assert!((beta - 1.0).abs() < 1e-14);
    }
}
