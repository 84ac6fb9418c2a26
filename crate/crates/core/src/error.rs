use thiserror::Error;

/// Errors raised by the laboratory.
///
/// Variants are grouped by the failure taxonomy used for CLI exit codes: see
/// [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("complex argument with |Im z| = {im} lies outside the strip of half-width {strip}")]
    StripViolation { im: f64, strip: f64 },

    #[error("operation not supported for this function variant: {0}")]
    UnsupportedVariant(String),

    #[error("function is not monotone increasing: derivative {value:e} at t = {at}")]
    Monotonicity { at: f64, value: f64 },

    #[error("truncation error in {what}: tail {tail:e} exceeds tolerance {tol:e}")]
    Truncation { what: String, tail: f64, tol: f64 },

    #[error("quadrature accuracy {achieved:e} above requested {requested:e} in {what}")]
    Accuracy {
        what: String,
        achieved: f64,
        requested: f64,
    },

    #[error("exponential tail fit rejected: relative residual {residual:e} above {threshold:e}")]
    FitQuality { residual: f64, threshold: f64 },

    #[error("argument {im} is outside the moment-finite region (limit {limit})")]
    Divergence { im: f64, limit: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("periodization error: {which} has end mismatch {jump:e} (tolerance {tol:e})")]
    Periodization { which: String, jump: f64, tol: f64 },

    #[error("derivative required: {0}")]
    DerivativeRequired(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("route mismatch: {0}")]
    RouteMismatch(String),

    #[error("sign constraint violated: c1*c2 = {0} must be positive")]
    SignConstraint(f64),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("probe selection failed: condition numbers {primary:e} and {secondary:e}")]
    ProbeSelection { primary: f64, secondary: f64 },

    #[error("range endpoint {endpoint} = {value} is not inside the domain ({lo}, {hi}) of {name}")]
    Containment {
        name: String,
        endpoint: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("report has no {0} section")]
    SectionAbsent(String),

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("LAPACK routine {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status: 2 for usage/config problems, 3 for numerical
    /// accuracy failures. Check failures (exit 1) are not errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Truncation { .. }
            | Error::Accuracy { .. }
            | Error::FitQuality { .. }
            | Error::Divergence { .. }
            | Error::Lapack { .. }
            | Error::NotHermitian(_) => 3,
            _ => 2,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
