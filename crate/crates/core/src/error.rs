use thiserror::Error;

/// Failure modes shared by every solver in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Model or grid parameters are inconsistent.
    #[error("configuration error: {0}")]
    Config(String),
    /// The pinning level a = 1 makes the interface problem trivial.
    #[error("degenerate model: {0}")]
    Degenerate(String),
    /// An iterative or direct solver did not reach its tolerance.
    #[error("solver failure: {message} (residual {residual:e})")]
    Solver { message: String, residual: f64 },
    /// A computed quantity violates a guaranteed property.
    #[error("postcondition violated: {0}")]
    Postcondition(String),
    /// The operation does not apply to this input.
    #[error("not applicable: {0}")]
    NotApplicable(String),
    /// Two fields live on different meshes.
    #[error("mesh mismatch")]
    MeshMismatch,
    /// The field vanishes (numerically) on the winding contour.
    #[error("winding degree undefined: {0}")]
    UndefinedDegree(String),
    /// A sweep did not bracket the requested transition.
    #[error("out of range: {message}; observed {observed:?}")]
    OutOfRange { message: String, observed: Vec<u32> },
    /// Input points coincide.
    #[error("singular input: {0}")]
    Singular(String),
    /// Vortex sites cannot be placed disjointly.
    #[error("too many sites: {0}")]
    TooManySites(String),
}

pub type Result<T> = std::result::Result<T, Error>;
