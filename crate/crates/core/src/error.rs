use thiserror::Error;

/// Errors raised by the rate, outage and experiment layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown variable label `{0}`")]
    UnknownLabel(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A covariance sub-determinant fell below the relative tolerance.
    #[error(
        "degenerate covariance for variables {subset:?} (relative determinant {relative_det:e})"
    )]
    Degenerate {
        subset: Vec<String>,
        relative_det: f64,
    },

    /// The relay index rate cannot carry the requested quantizer.
    #[error("relay index rate {ru} is below the quantizer floor {floor}")]
    Infeasible { ru: f64, floor: f64 },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
