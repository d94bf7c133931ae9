use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),

    #[error("radius {r} lies inside the boundary sphere r0 = {r0}")]
    OutsideDomain { r: f64, r0: f64 },

    #[error("capacity integral diverges: {0}")]
    DivergentCapacity(String),

    #[error("extrapolation did not converge: estimate {estimate}, error {error:e} > tolerance {tolerance:e}")]
    NonConvergentExtrapolation {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("insufficient decay at infinity: {0}")]
    InsufficientDecay(String),

    #[error("power-law fit refused: {0}")]
    FitRefused(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("maximum principle violated: {0}")]
    MaximumPrincipleViolation(String),

    #[error("scalar curvature is negative (R = {value:e} at r = {radius}); the theorem requires R >= 0")]
    NegativeScalarCurvature { radius: f64, value: f64 },

    #[error("boundary constant c = {0} is outside the admissible range: {1}")]
    InvalidBoundaryConstant(f64, String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
