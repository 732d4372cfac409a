use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{function} evaluated at {at} hits its pole at {pole}")]
    Domain {
        function: &'static str,
        at: f64,
        pole: f64,
    },

    #[error("{function} is undefined at {at} (outside [{lo}, {hi}])")]
    OutOfTable {
        function: &'static str,
        at: f64,
        lo: f64,
        hi: f64,
    },

    #[error("adaptive quadrature did not converge (achieved error estimate {achieved:e})")]
    QuadratureNonConvergence { achieved: f64 },

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    EigenNonConvergence { iterations: usize },

    #[error("no positive definite solution: {reason}")]
    NoPositiveDefiniteSolution { reason: String },

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error(
        "Newton iteration did not converge in {iterations} iterations \
         (best residual {residual:e} at {best:?})"
    )]
    EquilibriumNonConvergence {
        iterations: usize,
        best: Vec<f64>,
        residual: f64,
    },

    #[error("non-finite state encountered; last valid time t = {last_valid_time}")]
    NonFinite { last_valid_time: f64 },

    #[error(
        "time step underflow (dt = {dt:e}) at t = {t}: the problem is too stiff for \
         explicit stepping, use a coarser grid (larger spacing)"
    )]
    StepUnderflow { dt: f64, t: f64 },

    #[error("time step {dt} exceeds the explicit diffusive stability limit {limit}")]
    UnstableStep { dt: f64, limit: f64 },

    #[error("diffusion h_{component} = {value} is not positive at {at} (requires h_i > 0)")]
    NonPositiveDiffusion {
        component: usize,
        value: f64,
        at: f64,
    },

    #[error("analysis window too short: {samples} samples, need at least {required}")]
    WindowTooShort { samples: usize, required: usize },

    #[error(
        "Lyapunov weights unavailable: gain product {product} does not satisfy the \
         secant bound {threshold}"
    )]
    WeightsPrecondition { product: f64, threshold: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Whether the error originates from user input rather than numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidParameter { .. }
                | Error::DimensionMismatch { .. }
                | Error::Io(_)
        )
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        });
    }
    Ok(())
}
