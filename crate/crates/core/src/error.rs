use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// The curve has no corner at t = 0 (interior angle equals pi).
    #[error("smooth point: interior angle {phi} is pi to within {tol:e}")]
    SmoothPoint { phi: f64, tol: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("function returned non-finite value {value} at node {index} (x = {node})")]
    NonFiniteEvaluation { index: usize, node: f64, value: f64 },

    #[error("node computation did not converge at index {index}")]
    NoConvergence { index: usize },

    #[error("non-finite matrix entry at arc ({i},{j}), row node {l}, column node {h}")]
    NonFiniteEntry { i: usize, j: usize, l: usize, h: usize },

    #[error("matrix is numerically singular at pivot {pivot}")]
    Singular { pivot: usize },

    #[error("point ({x}, {y}) lies on the boundary")]
    OnBoundary { x: f64, y: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("kernel orientation check failed: {0}")]
    Orientation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
