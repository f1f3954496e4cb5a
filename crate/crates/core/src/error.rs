use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero quaternion has no inverse")]
    ZeroInverse,

    #[error("pole: denominator norm {0:e} below 1e-300")]
    Pole(f64),

    #[error("orbit left every bounded region and the map has no finite limit there")]
    Unbounded,

    #[error("degenerate density matrix: {0}")]
    DegenerateState(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("empty raster")]
    EmptyRaster,

    #[error("too few marked cells for box counting: {found} < {required}")]
    TooFewPoints { found: usize, required: usize },

    #[error("malformed input {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
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
