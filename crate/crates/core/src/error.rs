use thiserror::Error;

pub type Result<T, E = PlanError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum PlanError {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The scenario cannot be flown or served at all (e.g. the endpoints are
    /// out of reach within `N * delta_max * v_max`).
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl PlanError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        PlanError::Domain(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        PlanError::DimensionMismatch(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        PlanError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
