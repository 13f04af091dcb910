use thiserror::Error;

/// Errors raised by the laboratory's solvers and constructors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("set has zero mass under the reference measure")]
    ZeroMassSet,

    #[error("dimension parameter must be negative, got {0}")]
    InvalidDimension(f64),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("operation requires a segment, got a circle")]
    NonSegment,

    #[error("density {which} vanishes on interior cell {cell} of its support")]
    DegenerateDensity { which: usize, cell: usize },

    #[error("quadrature did not converge after {doublings} doublings (last relative change {rel_change:e})")]
    QuadratureNonConvergent { doublings: usize, rel_change: f64 },

    #[error("convexity certificate failed: min residual {min_residual:e} at grid index {index}")]
    ConvexityViolation { min_residual: f64, index: usize },

    #[error("triangle inequality violated at ({i}, {j}, {k}): d(i,k)={d_ik} > d(i,j)+d(j,k)={via}")]
    TriangleViolation {
        i: usize,
        j: usize,
        k: usize,
        d_ik: f64,
        via: f64,
    },

    #[error("invalid metric space: {0}")]
    InvalidSpace(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
