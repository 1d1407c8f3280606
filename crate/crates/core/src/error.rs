use thiserror::Error;

use crate::mesh::MeshError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ellipticity violated at ({x:.6}, {y:.6}): eigenvalues ({min:.6e}, {max:.6e}) outside [1/{lambda}, {lambda}]")]
    Ellipticity {
        x: f64,
        y: f64,
        min: f64,
        max: f64,
        lambda: f64,
    },

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error("function spaces do not match")]
    SpaceMismatch,

    #[error("config error: {0}")]
    Config(String),

    #[error("hypothesis not met: {0}")]
    Hypothesis(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
