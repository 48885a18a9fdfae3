use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site {site} is outside the chain 1..={n_qubits}")]
    SiteOutOfRange { site: usize, n_qubits: usize },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid Hamiltonian spec: {0}")]
    InvalidSpec(String),

    #[error("unsupported single-qubit state descriptor `{0}`")]
    UnsupportedState(String),

    #[error("unknown Pauli operator `{0}`")]
    UnknownPauli(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} at N = {n_qubits} exceeds the configured limit of N = {limit}")]
    DimensionLimit {
        what: &'static str,
        n_qubits: usize,
        limit: usize,
    },

    #[error(
        "Krylov step did not converge: error estimate {estimate:e} > tolerance {tolerance:e} \
         at subspace dimension {max_dim}"
    )]
    KrylovNotConverged {
        max_dim: usize,
        estimate: f64,
        tolerance: f64,
    },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("not enough data points: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
