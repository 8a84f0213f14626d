//! Shared error type for the whole engine.

/// Everything that can go wrong while parsing input data or evaluating
/// geometric quantities. Construction-time validation failures carry enough
/// context to tell the user which condition broke and where.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid point: coordinate {index} is {value}")]
    InvalidPoint { index: usize, value: f64 },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("singular metric at {point:?} (det = {det:e})")]
    SingularMetric { point: Vec<f64>, det: f64 },

    #[error("metric is neither symmetric nor skew-symmetric at {point:?}")]
    NotSignedSymmetric { point: Vec<f64> },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("kind mismatch: {0}")]
    KindMismatch(String),

    #[error("not an almost product structure: {0}")]
    NotProduct(String),

    #[error("not an almost complex structure: {0}")]
    NotComplexStructure(String),

    #[error("operators do not anticommute: {0}")]
    NotAnticommuting(String),

    #[error("not a generalized quaternionic structure: {0}")]
    NotQuaternionic(String),

    #[error("imaginary residual {max:e} exceeds tolerance {tol:e}")]
    ResidualImaginary { max: f64, tol: f64 },

    #[error("family parameters not admissible: {0}")]
    AdmissibilityFailed(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid chart: {0}")]
    InvalidChart(String),
}

pub type Result<T> = std::result::Result<T, Error>;
