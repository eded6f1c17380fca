use std::path::PathBuf;

/// Crate-wide error type.
///
/// Variants are grouped by failure class so callers can map them to exit
/// codes or Python exceptions without string matching.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A probability vector failed validation.
    #[error("invalid distribution: {0}")]
    Distribution(String),

    /// A prospect failed validation (probabilities or payoffs).
    #[error("invalid prospect: {0}")]
    Prospect(String),

    /// An argument left the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or inconsistent input data (CSV, panels, allow-lists).
    #[error("ingestion error: {0}")]
    Ingestion(String),

    /// A feature matrix failed validation.
    #[error("feature matrix error: {0}")]
    Features(String),

    /// A linear system was numerically rank-deficient.
    #[error("numerically rank-deficient system: {0}")]
    NumericalRank(String),

    /// Coordinate descent produced non-finite coefficients. Merely running
    /// out of sweeps is reported through the fit result, not as an error.
    #[error("coordinate descent diverged after {sweeps} sweeps (last max coefficient change {max_delta:e})")]
    NonConvergence { sweeps: usize, max_delta: f64 },

    /// Gradient descent produced a non-finite loss.
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Divergence { epoch: usize },

    /// An I/O failure, annotated with the path involved.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
