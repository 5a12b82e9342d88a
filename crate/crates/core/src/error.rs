use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Operator parameters or a derived precondition are violated.
    #[error("parameter constraint violated: {0}")]
    Constraint(String),

    /// The requested moment order exceeds the convergence limit.
    #[error("moment of order {order} is undefined (limit is {limit})")]
    MomentUndefined { order: u32, limit: u32 },

    #[error("domain error: {0}")]
    Domain(String),

    /// Declared growth order of the test function is too large for the integral to converge.
    #[error("growth order {alpha} exceeds the admissible limit {limit}")]
    GrowthViolation { alpha: f64, limit: f64 },

    #[error("quadrature did not converge within {nodes} nodes (last estimate {estimate}, change {change:e})")]
    NonConvergence {
        estimate: f64,
        change: f64,
        nodes: usize,
    },

    #[error("derivative of order {requested} requested but only {available} available")]
    MissingDerivative { requested: usize, available: usize },

    #[error("no analytic modulus for `{function}` (derivative order {order})")]
    MissingModulus { function: String, order: usize },

    #[error("ladder shape error: {0}")]
    LadderShape(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
