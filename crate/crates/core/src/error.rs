use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: argument {value} outside the domain")]
    Domain { what: &'static str, value: f64 },

    #[error("{what}: no convergence after {iterations} iterations")]
    Convergence { what: &'static str, iterations: usize },

    #[error("invalid N-function: {0}")]
    InvalidNFunction(String),

    #[error("sobolev conjugate undefined near zero: integrand exponent {exponent} is not integrable at 0")]
    SobolevUndefinedNearZero { exponent: f64 },

    #[error("grid functions live on different grids")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("function does not vanish on the boundary (max |u| on boundary = {max_boundary})")]
    NotDirichlet { max_boundary: f64 },

    #[error("steklov radius {radius} is smaller than the grid spacing {spacing}")]
    EmptyStencil { radius: f64, spacing: f64 },

    #[error("no sign change of min_t I(t u0) for lambda up to {lambda_max}")]
    NoSignChange { lambda_max: f64, trace: Vec<(f64, f64)> },

    #[error("no negative-energy minimizer: {0}")]
    NoNegativeEnergy(String),

    #[error("no mountain pass geometry at this lambda: {0}")]
    NoMountainPass(String),

    #[error("problem hypotheses violated: {0}")]
    Hypothesis(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
