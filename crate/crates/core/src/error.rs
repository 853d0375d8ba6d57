use thiserror::Error;

/// Failures raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eccentricity {0} outside [0, 1)")]
    EccOutOfRange(f64),

    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    #[error("matrix is not symplectic: |det - 1| = {defect:.3e}")]
    NotSymplectic { defect: f64 },

    #[error("omega is not on the unit circle: |omega| = {modulus}")]
    NotOnUnitCircle { modulus: f64 },

    #[error("not converged: {0}")]
    NotConverged(String),

    #[error("no sign change of the {what} shooting function on [{lo}, {hi}]")]
    RootNotBracketed { what: &'static str, lo: f64, hi: f64 },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("beta = {beta} is within {guard} of the singular value 3/4")]
    NearSingularity { beta: f64, guard: f64 },

    #[error("quadrature not converged at beta = {beta}: relative change {change:.3e}")]
    QuadratureNotConverged { beta: f64, change: f64 },

    #[error("truncated resolvent is singular at beta = {beta}")]
    NotInvertible { beta: f64 },

    #[error("eccentricity {ecc} beyond traced curve range [0, {max}]")]
    CurveRangeExceeded { ecc: f64, max: f64 },

    #[error("consistency violation at (beta = {beta}, e = {ecc}): {what}: expected {expected}, found {found}")]
    ConsistencyViolation {
        beta: f64,
        ecc: f64,
        what: String,
        expected: String,
        found: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
