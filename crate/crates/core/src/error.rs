use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("theta = {0} is outside [0, pi/2]")]
    ThetaOutOfRange(f64),

    #[error("vector ({x}, {y}, {z}) has norm {norm}, expected 1")]
    NotUnit { x: f64, y: f64, z: f64, norm: f64 },

    #[error("polar angle tau = {0} is outside [0, pi]")]
    TauOutOfRange(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "no effective setting found for theta = {theta}, a = {a:?}, b = {b:?} \
         (best residual {best_residual:e})"
    )]
    NoRoot {
        theta: f64,
        a: [f64; 3],
        b: [f64; 3],
        best_residual: f64,
    },

    #[error("quadrature did not converge: estimate {estimate}, error {error:e} > tolerance {tolerance:e}")]
    QuadratureNotConverged {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("missing variable {0}")]
    MissingVariable(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("unsupported alphabet: {0}")]
    UnsupportedAlphabet(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
}
