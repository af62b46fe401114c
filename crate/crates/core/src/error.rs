use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {point:?} (stencil along axis {axis}) lies outside the field domain")]
    OutOfDomain { point: Vec<f64>, axis: usize },

    #[error("field produced a non-finite value at {point:?}")]
    NonFinite { point: Vec<f64> },

    #[error("metric is singular or ill-conditioned at {point:?} (condition number {condition:e})")]
    SingularMetric { point: Vec<f64>, condition: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid finite-difference scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid signature: {0}")]
    InvalidSignature(String),

    #[error("invalid soliton configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("direction vector must be nonzero")]
    ZeroDirection,

    #[error(
        "null direction forces a steady soliton over a Ricci-flat fiber \
         (rho = {rho}, lambda_F = {lambda_f}; both must vanish)"
    )]
    NullDirectionForcing { rho: f64, lambda_f: f64 },

    #[error("operation requires a {expected} direction")]
    WrongCausalType { expected: &'static str },

    #[error("profiles violate phi'/phi = k f'/f (max deviation {max_deviation:e} at xi = {xi})")]
    Proportionality { max_deviation: f64, xi: f64 },

    #[error("phase variable z = {z} is outside the supported region z > {root}")]
    UnsupportedPhaseRegion { z: f64, root: f64 },

    #[error("integrator failed near xi = {last_good_xi}: {reason}")]
    Integrator { last_good_xi: f64, reason: String },

    #[error("adaptive quadrature did not converge on [{a}, {b}] (error estimate {estimate:e})")]
    QuadratureNonConvergence { a: f64, b: f64, estimate: f64 },

    #[error("operation needs a concrete fiber metric; the data carries an abstract Einstein fiber")]
    UnsupportedFiberMode,
}
