use thiserror::Error;

/// Errors raised by the geometry engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by a jet whose value {value:e} is below the absolute floor")]
    DivisionByZeroValue { value: f64 },

    #[error("{function} is undefined at value {value:e}")]
    DomainError { function: &'static str, value: f64 },

    #[error("derivative order {requested} exceeds jet order {available}")]
    OrderExceeded { requested: usize, available: usize },

    #[error("invalid jet context: {0}")]
    InvalidContext(String),

    #[error(
        "fundamental tensor is not positive definite (smallest eigenvalue {min_eigenvalue:e})"
    )]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix is singular or ill-conditioned (condition number {condition:e})")]
    SingularMetric { condition: f64 },

    #[error("unsupported tensor variance {0:?}")]
    UnsupportedVariance(String),

    #[error("Randers condition violated: |beta|_alpha^2 = {norm_sq}")]
    RandersConditionViolated { norm_sq: f64 },

    #[error("indicatrix integration did not converge (relative change {relative_change:e})")]
    IntegrationDidNotConverge { relative_change: f64 },

    #[error("the Busemann-Hausdorff density needs an analytic Randers structure")]
    UnsupportedVolume,

    #[error("vector field is not projective (residual {residual:e})")]
    NotProjective { residual: f64 },

    #[error(
        "C-projective criteria disagree: closedness {closedness:e}, L(Sigma) {lie_sigma:e}, L(Xi) {lie_xi:e}"
    )]
    EquivalenceViolation {
        closedness: f64,
        lie_sigma: f64,
        lie_xi: f64,
    },

    #[error("isotropy factor c(x) not supplied and the isotropy detector failed (residual {residual:e})")]
    IsotropyUnknown { residual: f64 },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("unsupported constant curvature {0}; only 0 and -1 are implemented")]
    UnsupportedCurvature(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("nullity did not stabilise under refinement: {history:?}")]
    RankDeficientSampling { history: Vec<usize> },

    #[error("point {index} is outside the metric's domain: {reason}")]
    OutOfDomain { index: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
