use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A profile, curve, grid or option failed its invariants.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("effective potential is not confining at xi = {xi}: {detail}")]
    NotConfining { xi: f64, detail: String },

    #[error("eigenvalue collision at xi = {xi}: gap {gap:e} below tolerance {tol:e}")]
    EigenCollision { xi: f64, gap: f64, tol: f64 },

    #[error("requested {requested} eigenvalues from a matrix of dimension {dimension}")]
    TooManyEigenvalues { requested: usize, dimension: usize },

    #[error("dimension {dimension} exceeds the dense oracle cap of {cap}")]
    DimensionCap { dimension: usize, cap: usize },

    #[error("inverse iteration did not converge in {iterations} steps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for errors that stem from malformed input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::Config(_) | Error::Json(_) | Error::Csv(_)
        )
    }
}
