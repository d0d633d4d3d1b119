use thiserror::Error;

/// Errors raised by the solvers, operators and report machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadrature grid {n_theta}x{n_phi} is too coarse for lmax={lmax}")]
    GridTooCoarse { lmax: u32, n_theta: usize, n_phi: usize },
    #[error("strip height must be positive, got {0}")]
    NonPositiveHeight(f64),
    #[error("mesh resolution: {0}")]
    MeshResolution(String),
    #[error("singular tridiagonal system (zero pivot at row {row})")]
    SingularSystem { row: usize },
    #[error("time {0} is not on the snapshot grid")]
    TimeNotStored(f64),
    #[error("snapshot time grids are misaligned")]
    TimeGridMismatch,
    #[error("infeasible regime: {0}")]
    InfeasibleRegime(String),
    #[error("unknown report format `{0}`")]
    UnknownFormat(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
