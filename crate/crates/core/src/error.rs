use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid spin quantum number: {0}")]
    InvalidSpin(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("block size {block} does not divide {len}")]
    IndivisibleBlock { len: usize, block: usize },

    #[error("invalid coarse-graining: {0}")]
    InvalidCoarseGraining(String),

    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    #[error("invalid window: {0}")]
    Window(String),

    #[error("point not on the unit sphere (|r|^2 = {0})")]
    NotOnSphere(f64),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI: 2 for configuration problems, 3 for
    /// numeric or I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            _ => 3,
        }
    }
}
