use thiserror::Error;

pub type Result<T, E = VortexError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VortexError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("kernel singularity: points coincide ({x}, {y})")]
    Singular { x: f64, y: f64 },

    #[error("vortices {i} and {j} coincide (distance {distance:e})")]
    Coincident { i: usize, j: usize, distance: f64 },

    #[error("near-collision of vortices {i} and {j} at t = {t} (distance {distance:e})")]
    Collision {
        t: f64,
        i: usize,
        j: usize,
        distance: f64,
    },

    #[error("step budget of {max_steps} exhausted at t = {t}")]
    StepBudget { max_steps: usize, t: f64 },

    #[error("wall-clock budget of {budget_secs} s exhausted at t = {t} ({accepted} steps)")]
    WallClock { budget_secs: f64, t: f64, accepted: usize },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("no instability: {0}")]
    NoInstability(String),

    #[error("trajectory did not reach the exit radius {radius:e} before t = {horizon}")]
    NoEscape { radius: f64, horizon: f64 },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("inverse map failed to converge for z = ({re}, {im}): residual {residual:e}")]
    Inversion { re: f64, im: f64, residual: f64 },

    #[error("conformal map is degenerate: {0}")]
    DegenerateMap(String),

    #[error(transparent)]
    Io(#[from] IoError),
}

/// `std::io::Error` is neither `Clone` nor `PartialEq`; keep its rendering.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("i/o error: {0}")]
pub struct IoError(pub String);

impl From<std::io::Error> for VortexError {
    fn from(e: std::io::Error) -> Self {
        VortexError::Io(IoError(e.to_string()))
    }
}
