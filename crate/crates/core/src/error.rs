use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot invert the zero octonion")]
    ZeroOctonion,
    #[error("negative power of the zero octonion")]
    ZeroPower,
    #[error("metric is not positive definite")]
    NotPositiveDefinite,
    #[error("3-form at site {site} is not positive (or its metric is not the identity)")]
    NonPositiveForm { site: usize },
    #[error("field is not unit-norm at site {site}: |V|^2 = {norm2}")]
    NonUnit { site: usize, norm2: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid field spec: {0}")]
    InvalidSpec(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("form degree {0} is not supported by this operation")]
    Degree(usize),
    #[error("non-positive time step {0}")]
    TimeStep(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
