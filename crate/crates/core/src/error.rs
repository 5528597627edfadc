use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("region cardinality {requested} exceeds cap {cap}")]
    CapExceeded { requested: usize, cap: usize },

    #[error("simple random walk on Z^{d} is recurrent; Green function diverges (need d >= 3)")]
    RecurrentDimension { d: usize },

    #[error("requested tolerance {tolerance:e} unattainable within budget: {detail}")]
    ToleranceUnattainable { tolerance: f64, detail: String },

    #[error("factorization failure: {0}")]
    Factorization(String),

    #[error("constraint violated: {name}: {detail}")]
    ConstraintViolated { name: String, detail: String },

    #[error("seed condition violated: {0}")]
    SeedCondition(String),

    #[error("constants ledger has no entry for {name}")]
    MissingConstant { name: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invariant failure: {0}")]
    InvariantFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for configuration problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DimensionMismatch { .. }
            | Error::CapExceeded { .. }
            | Error::RecurrentDimension { .. }
            | Error::MissingConstant { .. }
            | Error::InvalidArgument(_)
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::ToleranceUnattainable { .. }
            | Error::Factorization(_)
            | Error::ConstraintViolated { .. }
            | Error::SeedCondition(_)
            | Error::InvariantFailure(_) => 3,
        }
    }
}
