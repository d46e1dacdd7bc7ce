//! Sparse storage, factorizations, dense eigensolvers and MinRes.

pub mod eigen;
pub mod factor;
pub mod infsup;
pub mod minres;
pub mod sparse;

pub use eigen::{generalized_sym_eig, generalized_sym_eigenvalues, spectral_condition_number, GeneralizedEigen, DENSE_GUARD};
pub use factor::{dense_cholesky, SparseCholesky, SparseLu};
pub use minres::{minres, random_initial_guess, IdentityOperator, LinearOperator, MinresSettings, SolveReport, StopReason};
pub use sparse::{dot, norm2, offsets, CsrMatrix};
