use thiserror::Error;

/// Everything that can go wrong across state conversion, exact solutions,
/// grid construction, time stepping and diagnostics.
#[derive(Debug, Error)]
pub enum UrelError {
    #[error("pressure must be positive, got {0}")]
    NonPositivePressure(f64),

    #[error("conserved state (a={a}, b={b}) outside admissible cone |b| < a")]
    InvalidState { a: f64, b: f64 },

    #[error("radicand 4a^2 - 3b^2 = {0} is negative beyond tolerance")]
    NegativeRadicand(f64),

    #[error("piecewise data: {0}")]
    Piecewise(String),

    #[error("radius {0} too close to the symmetry axis for evaluation")]
    RadiusTooSmall(f64),

    #[error("time {0} outside the evaluation range")]
    NegativeTime(f64),

    #[error("point (t={t}, x={x}) lies on a shock line; one-sided values differ")]
    OnShockLine { t: f64, x: f64 },

    #[error("jump has no speed: the conserved density does not jump")]
    DegenerateJump,

    #[error("boundary extrapolation refused: data is not twice differentiable near x={0}")]
    DiscontinuousData(f64),

    #[error("extrapolation radii must be positive, strictly decreasing and inside the data range")]
    BadExtrapolationRadii,

    #[error("grid violates the stability bound: lambda = {0} < 1")]
    CflViolation(f64),

    #[error("invalid grid parameters: {0}")]
    InvalidGrid(String),

    #[error("update lost admissibility at level {level}, node {node}: a={a}, b={b}")]
    StabilityLoss { level: usize, node: usize, a: f64, b: f64 },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("no grid levels left before reaching the requested time")]
    LevelExhausted,

    #[error("shock search window is too small: {0}")]
    WindowTooSmall(String),

    #[error("no shock found: largest jump is not separated from the background")]
    NoShock,

    #[error("shock track too short to fit a speed: {0} points")]
    ShortTrack(usize),

    #[error("level pair mismatch: {0}")]
    MismatchedLevels(String),

    #[error("solution snapshots share no overlapping radii")]
    EmptyOverlap,

    #[error("radius {0} outside simulated domain")]
    RadiusOutsideDomain(f64),

    #[error("wave never arrived at the probe radius within the simulated time")]
    NoArrival,

    #[error("full level history was not retained; rerun with history enabled")]
    HistoryNotRetained,

    #[error("config: {0}")]
    Config(String),

    #[error("config line {line}: {message}")]
    ConfigAt { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, UrelError>;
