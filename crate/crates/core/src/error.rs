use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("ball separation |x1 - x2| = {distance} outside [4r, 8r] = [{lower}, {upper}]")]
    SeparationViolation { distance: f64, lower: f64, upper: f64 },

    #[error("ball B_2r(x{index}) is not contained in B_(R/2): needs |x{index}| + 2r = {reach} <= {limit}")]
    ContainmentViolation { index: usize, reach: f64, limit: f64 },

    #[error("unsupported dimension n = {0} (only n = 1 is implemented here)")]
    UnsupportedDimension(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("kernel evaluated on the diagonal x = y")]
    DiagonalEvaluation,

    #[error("unsupported kernel: {0}")]
    UnsupportedKernel(String),

    #[error("function is not tail-integrable against |y|^(-n-2s): {0}")]
    NonIntegrableTail(String),

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("quadrature did not converge on [{a}, {b}]: error estimate {error:e} > tolerance {tolerance:e}")]
    QuadratureFailure { a: f64, b: f64, error: f64, tolerance: f64 },

    #[error("linear system is singular or inaccurate (relative residual {0:e})")]
    SingularSystem(f64),

    #[error("no cell centers fall inside {0}")]
    EmptySample(String),

    #[error("no positive c0 on the search grid satisfies L(w1 + c0 w2) <= 0")]
    NoPositiveC0,

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl LabError {
    /// Process exit code: 3 for configuration problems, 4 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::QuadratureFailure { .. }
            | LabError::SingularSystem(_)
            | LabError::NoPositiveC0 => 4,
            LabError::Io(_) => 1,
            _ => 3,
        }
    }

    /// Stable short name printed alongside the message on stderr.
    pub fn code(&self) -> &'static str {
        match self {
            LabError::SeparationViolation { .. } => "SeparationViolation",
            LabError::ContainmentViolation { .. } => "ContainmentViolation",
            LabError::UnsupportedDimension(_) => "UnsupportedDimension",
            LabError::InvalidParameter(_) => "InvalidParameter",
            LabError::DiagonalEvaluation => "DiagonalEvaluation",
            LabError::UnsupportedKernel(_) => "UnsupportedKernel",
            LabError::NonIntegrableTail(_) => "NonIntegrableTail",
            LabError::DomainViolation(_) => "DomainViolation",
            LabError::QuadratureFailure { .. } => "QuadratureFailure",
            LabError::SingularSystem(_) => "SingularSystem",
            LabError::EmptySample(_) => "EmptySample",
            LabError::NoPositiveC0 => "NoPositiveC0",
            LabError::Config(_) => "ConfigParseError",
            LabError::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
