use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degree {degree} exceeds the bound {bound}")]
    DegreeBound { degree: usize, bound: usize },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("principal part has no nonzero pure second derivative coefficient")]
    SingularPrincipalPart,

    #[error("coefficient jet known to order {available}, order {required} required")]
    InsufficientJet { required: usize, available: usize },

    #[error("mean flow is not subsonic: |M0| = {0}")]
    Supersonic(f64),

    #[error("density vanishes at the expansion center")]
    ZeroDensity,

    #[error("layer solver failed at layer {layer}: {reason}")]
    LayerSolve { layer: usize, reason: String },

    #[error("quasi-Trefftz certificate failed: relative residual {residual:e} > {tolerance:e}")]
    Certificate { residual: f64, tolerance: f64 },

    #[error("degenerate sampling: {0}")]
    DegenerateSampling(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
