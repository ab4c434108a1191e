use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be 1, 2, or 3 (got {0})")]
    InvalidDimension(usize),

    #[error("band {band}: {reason}")]
    InvalidBand { band: usize, reason: String },

    #[error("interaction ({a},{b}): {reason}")]
    InvalidInteraction { a: usize, b: usize, reason: String },

    #[error("unknown potential family `{0}` (expected `gaussian` or `exponential`)")]
    UnknownFamily(String),

    #[error("config: {0}")]
    Config(String),

    #[error("channel index {ell} out of range for d = {d}")]
    ChannelOutOfRange { ell: usize, d: usize },

    #[error("grid: {0}")]
    Grid(String),

    #[error("operator requested at T = {t:.6e} but grid was built for T >= {design:.6e}")]
    GridTemperatureMismatch { t: f64, design: f64 },

    #[error("eigensolver did not converge (LAPACK info = {0})")]
    EigenConvergence(i32),

    #[error("bracket failure: {0}")]
    Bracket(String),

    #[error(
        "gap iteration did not converge after {iterations} iterations \
         (final residual {residual:.3e}, {restarts} restarts)"
    )]
    GapNotConverged {
        iterations: usize,
        residual: f64,
        restarts: usize,
        history: Vec<f64>,
    },

    #[error("{0}")]
    Invalid(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
