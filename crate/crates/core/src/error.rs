use thiserror::Error;

/// Errors raised by the numerical and operator-algebra routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("antilinear operator is singular (smallest singular value {smallest:.3e})")]
    SingularOperator { smallest: f64 },

    #[error("antilinear operator is not an involution (residual {residual:.3e})")]
    NotInvolution { residual: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("vector is not cyclic for the algebra (orbit rank {rank} < {dim})")]
    NotCyclic { rank: usize, dim: usize },

    #[error("vector is not separating for the algebra (orbit map nullity {nullity})")]
    NotSeparating { nullity: usize },

    #[error("operator is not in the algebra (residual {residual:.3e})")]
    NotInAlgebra { residual: f64 },

    #[error("operator is not in the centralizer; no double exists (commutator {commutator:.3e})")]
    NotInCentralizer { commutator: f64 },

    #[error("algebras do not commute (max commutator {commutator:.3e})")]
    NonCommutingAlgebras { commutator: f64 },

    #[error(
        "modular and oracle paths disagree: dimensions {modular_dim} vs {oracle_dim}, \
         distance {distance:.3e}"
    )]
    PathDisagreement {
        modular_dim: usize,
        oracle_dim: usize,
        distance: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
