use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("cells per unit must be an even number >= 2 so the interface lies on mesh lines (got {0})")]
    OddResolution(usize),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("the interface has no facets")]
    EmptyInterface,

    #[error("dof {dof} constrained twice with conflicting values {first} and {second}")]
    ConflictingDirichlet { dof: usize, first: f64, second: f64 },

    #[error("boundary configuration mismatch: {0}")]
    BoundaryMismatch(String),

    #[error("factorization failed for {block}: {reason}")]
    Factorization { block: String, reason: String },

    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("dense problem of size {size} exceeds the guard of {limit} unknowns")]
    SizeGuard { size: usize, limit: usize },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
