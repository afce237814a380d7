use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("state is at round {actual}, expected round {expected}")]
    RoundMismatch { expected: u32, actual: u32 },
    #[error("corruption field is required for finite alpha and forbidden for alpha = inf")]
    CorruptionMismatch,
    #[error("certainty undefined: estimate {p_hat} does not exceed threshold {threshold}")]
    BelowThreshold { p_hat: f64, threshold: f64 },
    #[error("malformed document: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
