use thiserror::Error;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("point is off the model manifold (level-set residual {residual:.3e} > {tol:.1e})")]
    PointOffManifold { residual: f64, tol: f64 },

    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    #[error("ambient point is too far from the manifold for retraction (distance {distance:.3e})")]
    TooFar { distance: f64 },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("linear solver failure: {0}")]
    SolverFailure(String),

    #[error("input one-form is not closed (curl sup-norm {curl:.3e} > {tol:.1e})")]
    NonClosedInput { curl: f64, tol: f64 },

    #[error("period {period:.6} is not within 0.1 of an integer")]
    NonIntegralPeriod { period: f64 },

    #[error("node {node} drifted off the manifold (residual {residual:.3e})")]
    ManifoldViolation { node: usize, residual: f64 },

    #[error("angle field aliases at node {node} (neighbour jump {jump:.3})")]
    AngleAliasing { node: usize, jump: f64 },

    #[error("input is off-shell (residual sup-norm {residual:.3e} > {tol:.1e})")]
    OffShellInput { residual: f64, tol: f64 },

    #[error("perturbation step leaves the retraction trust region")]
    StepTooLarge,

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("degenerate Jacobian (rank {rank} of {expected})")]
    DegenerateJacobian { rank: usize, expected: usize },

    #[error("trivialization frame degenerates")]
    FrameDegeneracy,

    #[error("path endpoint is degenerate (margin {margin:.3e})")]
    DegenerateEndpoint { margin: f64 },

    #[error("degenerate crossing at t = {time:.6}")]
    DegenerateCrossing { time: f64 },

    #[error("spectral gap {gap:.3e} is below resolution (truncation estimate {estimate:.3e})")]
    GapBelowResolution { gap: f64, estimate: f64 },

    #[error("action must be positive, got {0}")]
    NonPositiveAction(f64),

    #[error("invalid index data: {0}")]
    InvalidIndexData(String),

    #[error("optimizer diverged: {0}")]
    Diverged(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
}
