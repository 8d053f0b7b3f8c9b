use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gain vectors have mismatched lengths (h: {h}, g: {g})")]
    LengthMismatch { h: usize, g: usize },
    #[error("instance needs at least one user")]
    NoUsers,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("power must be positive, got {0}")]
    NonPositivePower(f64),
    #[error("eavesdropper gain of user {0} is zero")]
    ZeroGain(usize),
    #[error("power policy coefficient {index} must be positive, got {value}")]
    NonPositiveAlpha { index: usize, value: f64 },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is singular or not positive definite (eigenvalue ratio {0:e})")]
    NearSingular(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coefficient vector is zero")]
    ZeroVector,
    #[error("integer matrix is rank deficient")]
    RankDeficient,
    #[error("brute force over budget: dimension {dim}, radius {radius}")]
    OverBudget { dim: usize, radius: i64 },
    #[error("rate budget {budget} exceeds the sum of caps {caps}")]
    InfeasibleBudget { budget: f64, caps: f64 },
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("bin {bin} is empty (only {bins} bins)")]
    EmptyBin { bin: u128, bins: u128 },
    #[error("io error: {0}")]
    Io(String),
    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Malformed(e.to_string())
    }
}
