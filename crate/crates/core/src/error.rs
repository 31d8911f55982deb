use thiserror::Error;

/// Errors produced by the construction and verification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the admissible parameter domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numeric procedure failed to reach its tolerance.
    #[error("numeric error: {what} (achieved {achieved:e})")]
    Numeric { what: String, achieved: f64 },

    /// Internal consistency violated (a formula was used outside its validity).
    #[error("consistency error: {0}")]
    Consistency(String),

    /// Mesh-level failure (degenerate triangles, unwelded seam).
    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn numeric(what: impl Into<String>, achieved: f64) -> Self {
        Error::Numeric {
            what: what.into(),
            achieved,
        }
    }

    pub fn domain(what: impl Into<String>) -> Self {
        Error::Domain(what.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
