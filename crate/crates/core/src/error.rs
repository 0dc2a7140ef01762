use crate::expr::ExprError;

/// Crate-wide error type. Variants are grouped roughly by the stage that
/// produces them: argument validation, coefficient evaluation, integration,
/// and root finding / spectral post-processing.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("scaling index must lie in (0, 1], got {alpha}")]
    InvalidScalingIndex { alpha: f64 },

    #[error("staircase argument must be nonnegative, got {x}")]
    NegativeAbscissa { x: f64 },

    #[error("invalid interval: need a < b, got a = {a}, b = {b}")]
    InvalidInterval { a: f64, b: f64 },

    #[error("need at least {min} steps, got {got}")]
    TooFewSteps { min: usize, got: usize },

    #[error("value list has length {got}, grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },

    #[error("trajectories live on different grids")]
    GridMismatch,

    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("coefficient evaluation at x = {x}: {source}")]
    CoefficientEval { x: f64, source: ExprError },

    #[error("integration diverged at node {node} (x = {x}, lambda = {lambda})")]
    Divergence { node: usize, x: f64, lambda: f64 },

    #[error("window must satisfy min < max, got ({min}, {max})")]
    InvalidWindow { min: f64, max: f64 },

    #[error("scan needs at least 2 points, got {got}")]
    TooFewScanPoints { got: usize },

    #[error("tolerance must be positive, got {tol}")]
    InvalidTolerance { tol: f64 },

    #[error("invalid bracket [{lo}, {hi}]: endpoints must straddle a sign change")]
    InvalidBracket { lo: f64, hi: f64 },

    #[error("root refinement exceeded {cap} iterations")]
    IterationCap { cap: usize },

    #[error("characteristic slope {slope:e} at lambda = {lambda} is below the degeneracy floor")]
    DegenerateSlope { lambda: f64, slope: f64 },

    #[error("direct ({direct}) and least-squares ({least_squares}) estimates of beta disagree")]
    BetaInconsistent { direct: f64, least_squares: f64 },

    #[error("residual {residual:e} at lambda = {lambda} exceeds the refinement tolerance {tol:e}")]
    ResidualTooLarge { lambda: f64, residual: f64, tol: f64 },

    #[error("eigenfunction weight {weight:e} at lambda = {lambda} is not positive")]
    NonPositiveWeight { lambda: f64, weight: f64 },

    #[error("need at least one eigenpair")]
    NoEigenpairs,

    #[error("convergence study needs at least 3 levels, each doubling the previous")]
    BadStudyLevels,

    #[error("convergence study: only {converged} level(s) converged, need at least 2")]
    StudyUnconverged { converged: usize },

    #[error("eigenvalue index {index} not found: {found} eigenvalue(s) in the window")]
    IndexNotFound { index: usize, found: usize },

    #[error("unknown example number {0}; available examples: 1, 2, 3")]
    UnknownExample(u8),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
