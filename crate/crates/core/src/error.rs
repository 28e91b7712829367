use thiserror::Error;

/// Errors produced by cone construction, barrier evaluation, certification and the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid degree {0}: interval cones need d >= 1 (d >= 0 for odd cones)")]
    InvalidDegree(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("point is not in the interior of the dual cone (block {block} has a nonpositive pivot)")]
    NotInterior { block: usize },

    #[error("Hessian is not positive definite")]
    SingularHessian,

    #[error("the cone operator is not injective (rank {rank} < {dim})")]
    NotInjective { rank: usize, dim: usize },

    #[error("dual vector does not certify the polynomial")]
    NotCertified,

    #[error("start point does not certify t - c_lo")]
    InvalidStart,

    #[error("no certifiable bound on the admissible branch")]
    NoCertifiableBound,

    #[error("Newton iteration did not converge after {0} iterations")]
    MaxIterations(usize),

    #[error("numerical failure: {0}")]
    NumericFailure(String),

    #[error("denominator {n} is too small (need at least {required})")]
    InvalidDenominator { n: u64, required: u64 },

    #[error("rounded certificate failed exact verification")]
    RoundingRejected,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
