use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("algebra mismatch: `{left}` vs `{right}`")]
    DescriptorMismatch { left: String, right: String },

    #[error("curves are not on the same interval and grid")]
    GridMismatch,

    #[error("unknown algebra id `{0}`")]
    UnknownAlgebra(String),

    #[error("basis does not close under the commutator: residual {residual:e}")]
    NotClosed { residual: f64 },

    #[error("matrix is outside the principal logarithm domain")]
    OutOfDomain,

    #[error("logarithm is not in the algebra: projection residual {residual:e}")]
    NotInAlgebra { residual: f64 },

    #[error("series could not be certified below {tol:e} within {depth} terms")]
    TruncationFailure { depth: usize, tol: f64 },

    #[error("curve radius {radius} is not below ln 2")]
    RadiusExceeded { radius: f64 },

    #[error("logarithm norm {norm} reached ln 2 at t = {t}")]
    PosterioriGuardFailed { t: f64, norm: f64 },

    #[error("algebra `{0}` is not nilpotent")]
    NotNilpotent(String),

    #[error("iterated transform varies by {variation:e} over [0, 1]")]
    ConstancyViolation { variation: f64 },

    #[error("operator norm bound {norm} of ξ − id is not below 1")]
    DomainViolation { norm: f64 },

    #[error("time {t} lies outside [{a}, {b}]")]
    OutOfInterval { t: f64, a: f64, b: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
