use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point lies below the wall (distance {distance} < radius {delta})")]
    PointBelowWall { distance: f64, delta: f64 },

    #[error("point is outside the chart sector (s = {s}, allowed [{lo}, {hi}])")]
    OutOfChart { s: f64, lo: f64, hi: f64 },

    #[error("finite-difference stencil leaves the domain near ({x}, {y})")]
    StencilOutOfDomain { x: f64, y: f64 },

    #[error("extrapolation sequence is not converging monotonically: {0}")]
    NonMonotoneSequence(String),

    #[error("invalid extrapolation samples: {0}")]
    InvalidSamples(String),

    #[error("stagnation point encountered at ({x}, {y}) after length {length}")]
    StagnationEncountered { x: f64, y: f64, length: f64 },

    #[error("trace left the domain at ({x}, {y})")]
    LeftDomain { x: f64, y: f64 },

    #[error("no crossing of the target ray within length {max_length}")]
    NoCrossing { max_length: f64 },

    #[error("pressure gradient vanishes at ({x}, {y})")]
    CriticalPoint { x: f64, y: f64 },

    #[error("pressure line did not meet the level set: {0}")]
    NoIntersection(String),

    #[error("wall pressure gradient mismatch at s = {s}: relative deviation {deviation:e}")]
    WallGradientMismatch { s: f64, deviation: f64 },

    #[error("outside the admissible range: {0}")]
    DomainError(String),

    #[error("invalid simulation config: {}", .0.join("; "))]
    ConfigError(Vec<String>),

    #[error("simulation diverged at t = {t}: max speed {max_speed} exceeds {limit}")]
    Diverged { t: f64, max_speed: f64, limit: f64 },

    #[error("probe at r = {r} is outside the grid interior")]
    ProbeOutsideGrid { r: f64 },

    #[error("pressure solver did not converge: residual {residual:e} after {iterations} iterations")]
    SolverFailed { residual: f64, iterations: usize },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
