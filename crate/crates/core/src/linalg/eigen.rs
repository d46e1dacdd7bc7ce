//! Dense symmetric generalized eigenproblems and spectral condition numbers.

use faer::linalg::triangular_solve::solve_lower_triangular_in_place;
use faer::{Mat, Par, Side};

use super::factor::dense_cholesky;
use super::sparse::CsrMatrix;
use crate::{Error, Result};

/// Largest dense problem the spectral routines accept.
pub const DENSE_GUARD: usize = 8000;

/// Eigenpairs of `K u = λ M u`, ascending, with `Uᵀ M U = I`.
#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns.
    pub vectors: Mat<f64>,
}

fn check_square(k: &Mat<f64>, m: &Mat<f64>) -> Result<usize> {
    let n = k.nrows();
    if k.ncols() != n || m.nrows() != n || m.ncols() != n {
        return Err(Error::Eigen(format!(
            "shape mismatch: K is {}x{}, M is {}x{}",
            k.nrows(),
            k.ncols(),
            m.nrows(),
            m.ncols()
        )));
    }
    if n > DENSE_GUARD {
        return Err(Error::SizeGuard { size: n, limit: DENSE_GUARD });
    }
    Ok(n)
}

/// Forms `L⁻¹ K L⁻ᵀ` for `M = L Lᵀ`.
fn reduce(k: &Mat<f64>, l: &Mat<f64>) -> Mat<f64> {
    let mut c = k.clone();
    solve_lower_triangular_in_place(l.as_ref(), c.as_mut(), Par::Seq);
    let mut c = c.transpose().to_owned();
    solve_lower_triangular_in_place(l.as_ref(), c.as_mut(), Par::Seq);
    // symmetrize round-off
    let n = c.nrows();
    for j in 0..n {
        for i in j + 1..n {
            let v = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    c
}

/// Solves `K u_i = λ_i M u_i` by Cholesky reduction `M = L Lᵀ` and a dense
/// symmetric eigensolve of `L⁻¹ K L⁻ᵀ`.
pub fn generalized_sym_eig(k: &Mat<f64>, m: &Mat<f64>) -> Result<GeneralizedEigen> {
    check_square(k, m)?;
    let l = dense_cholesky(m)?;
    let c = reduce(k, &l);
    let evd = c.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let values: Vec<f64> = (0..s.nrows()).map(|i| s[i]).collect();
    // u = L⁻ᵀ y
    let mut vectors = evd.U().to_owned();
    let lt = l.transpose().to_owned();
    faer::linalg::triangular_solve::solve_upper_triangular_in_place(lt.as_ref(), vectors.as_mut(), Par::Seq);
    Ok(GeneralizedEigen { values, vectors })
}

/// Eigenvalues only of `K u = λ M u`, ascending.
pub fn generalized_sym_eigenvalues(k: &Mat<f64>, m: &Mat<f64>) -> Result<Vec<f64>> {
    check_square(k, m)?;
    let l = dense_cholesky(m)?;
    let c = reduce(k, &l);
    c.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Eigen(format!("{e:?}")))
}

/// `max|λ| / min|λ|` over the spectrum of `A x = λ B x`, where `B` is the
/// matrix whose inverse is the preconditioner (so the spectrum is that of
/// the preconditioned operator).
pub fn spectral_condition_number(a: &CsrMatrix, preconditioner_matrix: &CsrMatrix) -> Result<f64> {
    let n = a.nrows();
    if n > DENSE_GUARD {
        return Err(Error::SizeGuard { size: n, limit: DENSE_GUARD });
    }
    let values = generalized_sym_eigenvalues(&a.to_dense(), &preconditioner_matrix.to_dense())?;
    let (lo, hi) = values.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v.abs()), hi.max(v.abs())));
    Ok(hi / lo)
}

/// Residual checks used by the tests: `(‖KU − MUΛ‖_∞ / ‖K‖_∞, ‖UᵀMU − I‖_∞)`.
pub fn eigen_residuals(k: &Mat<f64>, m: &Mat<f64>, eig: &GeneralizedEigen) -> (f64, f64) {
    let n = k.nrows();
    let u = &eig.vectors;
    let ku = k * u;
    let mu = m * u;
    let mut res = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            res = res.max((ku[(i, j)] - mu[(i, j)] * eig.values[j]).abs());
        }
    }
    let knorm = (0..n).map(|i| (0..n).map(|j| k[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max);
    let gram = u.transpose() * &mu;
    let mut orth = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            orth = orth.max((gram[(i, j)] - target).abs());
        }
    }
    (res / knorm.max(f64::MIN_POSITIVE), orth)
}
