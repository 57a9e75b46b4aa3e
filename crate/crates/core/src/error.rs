use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("simplex {simplex} references vertex {vertex}, but only {count} vertices exist")]
    IndexOutOfRange {
        simplex: usize,
        vertex: usize,
        count: usize,
    },

    #[error("simplex {simplex} is degenerate (volume {volume:e} at longest edge {longest_edge:e})")]
    DegenerateSimplex {
        simplex: usize,
        volume: f64,
        longest_edge: f64,
    },

    #[error("singular cone: vertex {vertex} lies {distance:e} from the cone vertex")]
    SingularCone { vertex: usize, distance: f64 },

    #[error("time step {dt:e} exceeds the stability cap; use dt <= {suggested:e}")]
    StabilityCap { dt: f64, suggested: f64 },

    #[error("unsupported boundary: {0}")]
    UnsupportedBoundary(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
