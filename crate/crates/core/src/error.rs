use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Input outside the domain of an operation (non-unit direction, point
    /// inside the obstacle, ...).
    #[error("domain error: {0}")]
    Domain(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    /// Invalid run or data description; the string names the offending field.
    #[error("invalid configuration: {field}: {message}")]
    Config { field: String, message: String },
    #[error("degenerate time coefficient: {0}")]
    Degenerate(String),
    #[error("per-step fixed point did not converge at t = {t} (last change {change:e})")]
    NonlinearDivergence { t: f64, change: f64 },
    #[error("not enough time levels: need {needed}, have {available}")]
    Staging { needed: usize, available: usize },
    #[error("unphysical state at t = {t}: {message}")]
    Physicality { t: f64, message: String },
}

impl Error {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
