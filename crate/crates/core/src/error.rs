use thiserror::Error;

/// Errors raised by mesh construction, parameter validation and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid parameter `{key}`: {message}")]
    InvalidParameter { key: &'static str, message: String },

    #[error("artificial diffusion exponent rejected: {0}")]
    EpsilonWindow(String),

    #[error("negative density {0} passed to a constitutive law")]
    NegativeDensity(f64),

    #[error("reference density must be positive, got {0}")]
    NonPositiveReference(f64),

    #[error("initial density has non-positive cell average {value} in cell {cell}")]
    NonPositiveInitialDensity { cell: usize, value: f64 },

    #[error("nonlinear iteration did not converge after {iterations} iterations (residual {residual:.3e}); reduce the time step")]
    PicardDivergence { iterations: usize, residual: f64 },

    #[error("density lost positivity in cell {cell} (value {value:.3e}) during the nonlinear iteration")]
    PositivityLoss { cell: usize, value: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),

    #[error("operation not supported: {0}")]
    Unsupported(String),

    #[error("time step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("order fit: {0}")]
    Eoc(String),

    #[error("config: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
