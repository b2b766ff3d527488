use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("vector is not in the operator domain (residual {residual:.3e})")]
    DomainViolation { residual: f64 },

    #[error("operator is not invertible (smallest singular value {margin:.3e})")]
    NotInvertible { margin: f64 },

    #[error("base operator has a nontrivial kernel (smallest singular value {margin:.3e})")]
    NotInvertibleBase { margin: f64 },

    #[error("point {0} is too close to the real axis")]
    RealPoint(Complex64),

    #[error("operator is not symmetric (deviation {deviation:.3e})")]
    NotSymmetric { deviation: f64 },

    #[error("parameter does not map N_z into N_zbar: {reason}")]
    ParameterShapeViolation { reason: String },

    #[error("parameter is not admissible: W_z - E has a fixed vector (margin {margin:.3e})")]
    NotAdmissible {
        witness: Vec<Complex64>,
        margin: f64,
    },

    #[error("operator is not an extension of the base operator (residual {residual:.3e})")]
    NotAnExtension { residual: f64 },

    #[error("no admissible rank-one choice found after {attempts} attempts")]
    ChoiceExhausted { attempts: usize },

    #[error("lambda = {lambda} hits the spectrum (smallest singular value {margin:.3e})")]
    SpectrumHit { lambda: Complex64, margin: f64 },

    #[error("projection onto H is not injective on L~(lambda = {lambda}) (margin {margin:.3e})")]
    ProjectionDegenerate { lambda: Complex64, margin: f64 },

    #[error("A_F(lambda) - lambda is singular at lambda = {lambda} (margin {margin:.3e})")]
    ResolventSingular { lambda: Complex64, margin: f64 },

    #[error("need at least {required} radii, got {actual}")]
    InsufficientSamples { required: usize, actual: usize },

    #[error("instance spec is infeasible: {0}")]
    SpecInfeasible(String),

    #[error("invalid sector: {0}")]
    InvalidSector(String),

    #[error("invalid extension: {0}")]
    InvalidExtension(String),

    #[error("no parameter sample at lambda = {0}")]
    MissingSample(Complex64),

    #[error("matrix is not non-expanding (norm {norm:.6})")]
    NotContractive { norm: f64 },

    #[error("malformed data: {0}")]
    Malformed(String),
}
