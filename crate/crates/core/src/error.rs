use thiserror::Error;

/// Errors raised by the numerical kernels, the expression language and the samplers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigensolver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    /// An eigenvalue sits on or next to the principal-branch cut (-inf, 0].
    #[error("square root branch violation: eigenvalue {re}{im:+}i is within {tol:e} of (-inf, 0]")]
    BranchCut { re: f64, im: f64, tol: f64 },

    #[error("matrix is numerically singular (condition estimate {cond:e})")]
    Singular { cond: f64 },

    #[error("eigenvalue {eigenvalue} lies outside the function domain ({lo}, {hi})")]
    OutsideSpectralDomain { eigenvalue: f64, lo: f64, hi: f64 },

    /// A matrix is not in the realization image of an operator system.
    #[error("matrix is not in the image of system `{system}` (residual {residual:e})")]
    NotInImage { system: String, residual: f64 },

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("variable {name} out of range: {message}")]
    VariableRange { name: String, message: String },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("invalid operator system: {0}")]
    InvalidSystem(String),

    #[error("sampling failed after {attempts} attempts: {reason}")]
    SamplingFailure { attempts: usize, reason: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("json: {0}")]
    Json(String),
}

impl Error {
    /// True for errors that mean "the point is outside where the formula is defined"
    /// as opposed to malformed input.
    pub fn is_out_of_domain(&self) -> bool {
        matches!(self, Error::BranchCut { .. } | Error::Singular { .. } | Error::OutsideSpectralDomain { .. })
    }

    /// Solver breakdowns and exhausted sampling budgets.
    pub fn is_numerical_failure(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::SamplingFailure { .. })
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
